#pragma once

#include <utility>
#include <variant>
#include <vector>

#include "jellium/types.hpp"

namespace jellium {

// Uniform probability measure on [a, b].
struct UniformInterval {
  double a = -1.0;
  double b = 0.0;
};

// alpha*rho = 1 on [-(alpha+n)/2, 0] plus (gamma-1) x^(gamma-2) on
// [0, ((alpha-n)/2)^(1/(gamma-1))]. Requires alpha > n and gamma > 1.
struct GammaFamily {
  int n = 1;
  double gamma = 2.0;
};

struct Knot {
  double x;
  double density;
};

// Piecewise-linear probability density through the knots, supported in
// (-inf, 0] and integrating to one.
struct FixedDensity {
  std::vector<Knot> knots;
};

using BackgroundShape = std::variant<UniformInterval, GammaFamily, FixedDensity>;

// A positive background charge alpha*rho, optionally dilated by `scale`
// (the law of scale*Y for Y ~ rho). Immutable; all queries are pure.
class Background {
 public:
  Background(BackgroundShape shape, double alpha, double scale = 1.0);

  static Background uniform(double a, double b, double alpha);
  static Background gamma_family(int n, double alpha, double gamma);
  static Background fixed_density(std::vector<Knot> knots, double alpha);

  const BackgroundShape& shape() const noexcept { return shape_; }
  double alpha() const noexcept { return alpha_; }
  double scale() const noexcept { return scale_; }
  PotentialForm form() const noexcept;

  // -alpha U_rho(x) = alpha * int |x - y| / 2 drho(y).
  double minus_potential(double x) const;
  // (alpha/2) int sign(x - y) drho(y), the derivative of minus_potential.
  double electric_field(double x) const;
  ValueSlope minus_potential_with_field(double x) const;
  // alpha * rho(x).
  double density(double x) const;

  std::pair<double, double> support() const;
  // Support endpoints and interior points where the density has kinks or jumps.
  std::vector<double> breakpoints() const;

  // W(rho) = -(1/4) iint |x - y| drho drho, per unit charge.
  double self_energy() const;

  Background dilated(double sigma) const;

 private:
  struct Unit {
    double value;  // int |x - y| / 2 drho(y)
    double slope;  // rho(-inf, x) - 1/2
  };
  Unit unit(double x) const;  // unscaled coordinates
  double unit_density(double x) const;
  void prepare_fixed_density();

  BackgroundShape shape_;
  double alpha_;
  double scale_;

  // Cumulative tables for FixedDensity: CDF and integral of the CDF at knots.
  std::vector<double> cdf_at_knot_;
  std::vector<double> icdf_at_knot_;
  double mean_ = 0.0;
};

double minus_potential(const Background& bg, double x);
double electric_field(const Background& bg, double x);
double self_energy(const Background& bg);

// The background carries alpha; a GasParams used with it must agree.
void require_matching_charge(const Background& bg, const GasParams& params);

// V_i(x) = ((2i - 1 - n)/2) x - alpha U_rho(x): the confining potential of the
// i-th largest particle once the pair interaction is rewritten over order
// statistics. Throws IndexOutOfRange unless 1 <= i <= n.
Potential1D per_particle_potential(const Background& bg, const GasParams& params, int i);

}  // namespace jellium
