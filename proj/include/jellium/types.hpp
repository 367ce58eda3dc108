#pragma once

#include <functional>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

namespace jellium {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Which evaluation route backs a potential. All of them are closed forms.
enum class PotentialForm { UniformClosed, GammaClosed, PiecewiseCubic, LimitClosed };

std::string_view to_string(PotentialForm form);

struct ValueSlope {
  double value;
  double slope;
};

// A convex confining potential on [lower, upper] (a hard wall where a bound is
// finite). Breakpoints are the points where the second derivative may jump.
class Potential1D {
 public:
  using Evaluator = std::function<ValueSlope(double)>;

  Potential1D(Evaluator eval, PotentialForm form, double lower = -kInf, double upper = kInf,
              std::vector<double> breakpoints = {});

  ValueSlope eval(double x) const { return eval_(x); }
  double operator()(double x) const { return eval_(x).value; }
  double derivative(double x) const { return eval_(x).slope; }

  double lower() const noexcept { return lower_; }
  double upper() const noexcept { return upper_; }
  std::span<const double> breakpoints() const noexcept { return breakpoints_; }
  PotentialForm form() const noexcept { return form_; }

 private:
  Evaluator eval_;
  PotentialForm form_;
  double lower_;
  double upper_;
  std::vector<double> breakpoints_;
};

// (n, beta, alpha). The n-particle Gibbs measure exists iff alpha > n - 1.
struct GasParams {
  int n = 1;
  double beta = 1.0;
  double alpha = 1.0;

  bool admissible() const noexcept { return n >= 1 && beta > 0 && alpha > n - 1; }
};

// Throws InadmissibleGas unless params.admissible().
void require_admissible(const GasParams& params);

// Positions sorted descending, x_(1) >= ... >= x_(n), with the cached energy.
struct Configuration {
  std::vector<double> positions;
  double energy = 0.0;
};

// The k right-most points, descending; `depth` records the truncation used to
// produce them (number of exponential terms or conditioning depth).
struct TopKSample {
  std::vector<double> values;
  long long depth = 0;
};

}  // namespace jellium
