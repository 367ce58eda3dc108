#include "jellium/background.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "jellium/error.hpp"

namespace jellium {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double gamma_left_edge(const GammaFamily& g, double alpha) { return 0.5 * (alpha + g.n); }

double gamma_right_edge(const GammaFamily& g, double alpha) {
  return std::pow(0.5 * (alpha - g.n), 1.0 / (g.gamma - 1.0));
}

}  // namespace

Potential1D::Potential1D(Evaluator eval, PotentialForm form, double lower, double upper,
                         std::vector<double> breakpoints)
    : eval_(std::move(eval)), form_(form), lower_(lower), upper_(upper),
      breakpoints_(std::move(breakpoints)) {
  std::sort(breakpoints_.begin(), breakpoints_.end());
  breakpoints_.erase(std::unique(breakpoints_.begin(), breakpoints_.end()), breakpoints_.end());
}

std::string_view to_string(PotentialForm form) {
  switch (form) {
    case PotentialForm::UniformClosed: return "UniformClosed";
    case PotentialForm::GammaClosed: return "GammaClosed";
    case PotentialForm::PiecewiseCubic: return "PiecewiseCubic";
    case PotentialForm::LimitClosed: return "LimitClosed";
  }
  return "unknown";
}

void require_admissible(const GasParams& params) {
  if (params.n < 1) throw InadmissibleGas("gas needs at least one particle");
  if (!(params.beta > 0)) throw InadmissibleGas("beta must be positive");
  if (!(params.alpha > params.n - 1)) {
    throw InadmissibleGas("the Gibbs measure exists if and only if alpha > n - 1 (alpha = " +
                          std::to_string(params.alpha) + ", n = " + std::to_string(params.n) +
                          ")");
  }
}

Background::Background(BackgroundShape shape, double alpha, double scale)
    : shape_(std::move(shape)), alpha_(alpha), scale_(scale) {
  if (!(alpha_ > 0) || !std::isfinite(alpha_)) {
    throw InvalidBackground("background charge alpha must be positive and finite");
  }
  if (!(scale_ > 0) || !std::isfinite(scale_)) {
    throw InvalidBackground("background scale must be positive and finite");
  }
  std::visit(Overloaded{
                 [](const UniformInterval& u) {
                   if (!std::isfinite(u.a) || !std::isfinite(u.b)) {
                     throw NonIntegrableBackground("uniform background needs finite endpoints");
                   }
                   if (!(u.a < u.b)) throw InvalidBackground("uniform background needs a < b");
                 },
                 [this](const GammaFamily& g) {
                   if (g.n < 0) throw InvalidBackground("gamma family needs n >= 0");
                   if (!(g.gamma > 1)) throw InvalidBackground("gamma family needs gamma > 1");
                   if (!(alpha_ > g.n)) {
                     throw InvalidBackground("gamma family needs alpha > n");
                   }
                 },
                 [this](const FixedDensity&) { prepare_fixed_density(); },
             },
             shape_);
}

Background Background::uniform(double a, double b, double alpha) {
  return Background(UniformInterval{a, b}, alpha);
}

Background Background::gamma_family(int n, double alpha, double gamma) {
  return Background(GammaFamily{n, gamma}, alpha);
}

Background Background::fixed_density(std::vector<Knot> knots, double alpha) {
  return Background(FixedDensity{std::move(knots)}, alpha);
}

void Background::prepare_fixed_density() {
  const auto& knots = std::get<FixedDensity>(shape_).knots;
  if (knots.size() < 2) throw InvalidBackground("fixed density needs at least two knots");
  for (std::size_t k = 0; k < knots.size(); ++k) {
    if (!std::isfinite(knots[k].x) || !std::isfinite(knots[k].density)) {
      throw NonIntegrableBackground("fixed density knots must be finite");
    }
    if (knots[k].density < 0) throw InvalidBackground("fixed density must be nonnegative");
    if (k > 0 && !(knots[k].x > knots[k - 1].x)) {
      throw InvalidBackground("fixed density knots must be strictly increasing");
    }
  }
  if (knots.back().x > 0) throw InvalidBackground("fixed density must be supported in (-inf, 0]");

  cdf_at_knot_.assign(knots.size(), 0.0);
  icdf_at_knot_.assign(knots.size(), 0.0);
  double mean = 0.0;
  for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
    const double u = knots[k].x;
    const double w = knots[k + 1].x - u;
    const double d0 = knots[k].density;
    const double d1 = knots[k + 1].density;
    const double s = (d1 - d0) / w;
    const double c = cdf_at_knot_[k];
    cdf_at_knot_[k + 1] = c + 0.5 * w * (d0 + d1);
    icdf_at_knot_[k + 1] = icdf_at_knot_[k] + c * w + d0 * w * w / 2 + s * w * w * w / 6;
    mean += u * w * (d0 + d1) / 2 + w * w * (d0 + 2 * d1) / 6;
  }
  if (std::abs(cdf_at_knot_.back() - 1.0) > 1e-9) {
    throw InvalidBackground("fixed density must integrate to 1 (got " +
                            std::to_string(cdf_at_knot_.back()) + ")");
  }
  mean_ = mean;
}

PotentialForm Background::form() const noexcept {
  switch (shape_.index()) {
    case 0: return PotentialForm::UniformClosed;
    case 1: return PotentialForm::GammaClosed;
    default: return PotentialForm::PiecewiseCubic;
  }
}

Background::Unit Background::unit(double x) const {
  return std::visit(
      Overloaded{
          [x](const UniformInterval& u) -> Unit {
            const double c = 0.5 * (u.a + u.b);
            const double len = u.b - u.a;
            if (x < u.a || x > u.b) return {0.5 * std::abs(x - c), x < c ? -0.5 : 0.5};
            const double d = x - c;
            return {(d * d + 0.25 * len * len) / (2 * len), d / len};
          },
          [this, x](const GammaFamily& g) -> Unit {
            // Closed form for the measure mu = alpha*rho, divided by alpha at the end.
            const double a = gamma_left_edge(g, alpha_);
            const double r = gamma_right_edge(g, alpha_);
            const double n = g.n;
            const double first_moment = -0.5 * a * a + (g.gamma - 1) / g.gamma * std::pow(r, g.gamma);
            const double at_left = 0.5 * (first_moment + alpha_ * a);
            const double at_zero = at_left - 0.5 * a * a + 0.5 * n * a;
            double value;
            double slope;
            if (x <= -a) {
              value = 0.5 * (first_moment - alpha_ * x);
              slope = -0.5 * alpha_;
            } else if (x <= 0) {
              value = at_left + 0.5 * (x * x - a * a) + 0.5 * n * (x + a);
              slope = x + 0.5 * n;
            } else if (x <= r) {
              value = at_zero + 0.5 * n * x + std::pow(x, g.gamma) / g.gamma;
              slope = 0.5 * n + std::pow(x, g.gamma - 1);
            } else {
              const double at_r = at_zero + 0.5 * n * r + std::pow(r, g.gamma) / g.gamma;
              value = at_r + 0.5 * alpha_ * (x - r);
              slope = 0.5 * alpha_;
            }
            return {value / alpha_, slope / alpha_};
          },
          [this, x](const FixedDensity& f) -> Unit {
            const auto& knots = f.knots;
            const double x0 = knots.front().x;
            if (x <= x0) return {0.5 * (mean_ - x), -0.5};
            if (x >= knots.back().x) return {0.5 * (x - mean_), 0.5};
            const auto it = std::upper_bound(knots.begin(), knots.end(), x,
                                             [](double v, const Knot& k) { return v < k.x; });
            const std::size_t k = static_cast<std::size_t>(it - knots.begin()) - 1;
            const double t = x - knots[k].x;
            const double w = knots[k + 1].x - knots[k].x;
            const double d0 = knots[k].density;
            const double s = (knots[k + 1].density - d0) / w;
            const double cdf = cdf_at_knot_[k] + d0 * t + s * t * t / 2;
            const double icdf = icdf_at_knot_[k] + cdf_at_knot_[k] * t + d0 * t * t / 2 + s * t * t * t / 6;
            return {0.5 * (mean_ - x0) + icdf - 0.5 * (x - x0), cdf - 0.5};
          },
      },
      shape_);
}

double Background::unit_density(double x) const {
  return std::visit(
      Overloaded{
          [x](const UniformInterval& u) { return (x >= u.a && x <= u.b) ? 1.0 / (u.b - u.a) : 0.0; },
          [this, x](const GammaFamily& g) {
            const double a = gamma_left_edge(g, alpha_);
            const double r = gamma_right_edge(g, alpha_);
            if (x >= -a && x <= 0) return 1.0 / alpha_;
            if (x > 0 && x <= r) return (g.gamma - 1) * std::pow(x, g.gamma - 2) / alpha_;
            return 0.0;
          },
          [x](const FixedDensity& f) {
            const auto& knots = f.knots;
            if (x < knots.front().x || x > knots.back().x) return 0.0;
            const auto it = std::upper_bound(knots.begin(), knots.end(), x,
                                             [](double v, const Knot& k) { return v < k.x; });
            if (it == knots.end()) return knots.back().density;
            const std::size_t k = static_cast<std::size_t>(it - knots.begin()) - 1;
            const double t = (x - knots[k].x) / (knots[k + 1].x - knots[k].x);
            return knots[k].density + t * (knots[k + 1].density - knots[k].density);
          },
      },
      shape_);
}

double Background::minus_potential(double x) const {
  return alpha_ * scale_ * unit(x / scale_).value;
}

double Background::electric_field(double x) const { return alpha_ * unit(x / scale_).slope; }

ValueSlope Background::minus_potential_with_field(double x) const {
  const Unit u = unit(x / scale_);
  return {alpha_ * scale_ * u.value, alpha_ * u.slope};
}

double Background::density(double x) const { return alpha_ * unit_density(x / scale_) / scale_; }

std::pair<double, double> Background::support() const {
  const auto [lo, hi] = std::visit(
      Overloaded{
          [](const UniformInterval& u) { return std::pair{u.a, u.b}; },
          [this](const GammaFamily& g) {
            return std::pair{-gamma_left_edge(g, alpha_), gamma_right_edge(g, alpha_)};
          },
          [](const FixedDensity& f) { return std::pair{f.knots.front().x, f.knots.back().x}; },
      },
      shape_);
  return {lo * scale_, hi * scale_};
}

std::vector<double> Background::breakpoints() const {
  std::vector<double> points;
  std::visit(Overloaded{
                 [&](const UniformInterval& u) { points = {u.a, u.b}; },
                 [&](const GammaFamily& g) {
                   points = {-gamma_left_edge(g, alpha_), 0.0, gamma_right_edge(g, alpha_)};
                 },
                 [&](const FixedDensity& f) {
                   for (const auto& k : f.knots) points.push_back(k.x);
                 },
             },
             shape_);
  for (auto& p : points) p *= scale_;
  return points;
}

double Background::self_energy() const {
  const double base = std::visit(
      Overloaded{
          [](const UniformInterval& u) { return -(u.b - u.a) / 12.0; },
          [this](const GammaFamily& g) {
            using boost::math::quadrature::gauss_kronrod;
            const double a = gamma_left_edge(g, alpha_);
            const double r = gamma_right_edge(g, alpha_);
            // Flat part has density 1/alpha; the power part is integrated in
            // u = x^(gamma-1), where (gamma-1) x^(gamma-2) dx = du.
            const double flat = gauss_kronrod<double, 61>::integrate(
                [this](double x) { return unit(x).value / alpha_; }, -a, 0.0, 15, 1e-13);
            const double power = gauss_kronrod<double, 61>::integrate(
                [this, &g](double u) { return unit(std::pow(u, 1.0 / (g.gamma - 1))).value / alpha_; },
                0.0, std::pow(r, g.gamma - 1), 15, 1e-13);
            return -0.5 * (flat + power);
          },
          [this](const FixedDensity& f) {
            // F is cubic and rho linear on each piece: 3-point Gauss-Legendre is exact.
            static constexpr double kNode = 0.7745966692414834;
            static constexpr double kWeights[3] = {5.0 / 9, 8.0 / 9, 5.0 / 9};
            static constexpr double kNodes[3] = {-kNode, 0.0, kNode};
            double total = 0.0;
            for (std::size_t k = 0; k + 1 < f.knots.size(); ++k) {
              const double mid = 0.5 * (f.knots[k].x + f.knots[k + 1].x);
              const double half = 0.5 * (f.knots[k + 1].x - f.knots[k].x);
              for (int q = 0; q < 3; ++q) {
                const double x = mid + half * kNodes[q];
                const double t = (x - f.knots[k].x) / (2 * half);
                const double rho = f.knots[k].density + t * (f.knots[k + 1].density - f.knots[k].density);
                total += half * kWeights[q] * unit(x).value * rho;
              }
            }
            return -0.5 * total;
          },
      },
      shape_);
  return scale_ * base;
}

Background Background::dilated(double sigma) const {
  Background copy = *this;
  if (!(sigma > 0)) throw InvalidBackground("dilation factor must be positive");
  copy.scale_ = scale_ * sigma;
  return copy;
}

double minus_potential(const Background& bg, double x) { return bg.minus_potential(x); }
double electric_field(const Background& bg, double x) { return bg.electric_field(x); }
double self_energy(const Background& bg) { return bg.self_energy(); }

void require_matching_charge(const Background& bg, const GasParams& params) {
  if (std::abs(bg.alpha() - params.alpha) > 1e-12 * (1.0 + std::abs(params.alpha))) {
    throw InvalidBackground("background charge " + std::to_string(bg.alpha()) +
                            " differs from the gas parameter alpha " + std::to_string(params.alpha));
  }
}

Potential1D per_particle_potential(const Background& bg, const GasParams& params, int i) {
  if (i < 1 || i > params.n) {
    throw IndexOutOfRange("particle index " + std::to_string(i) + " outside [1, " +
                          std::to_string(params.n) + "]");
  }
  require_matching_charge(bg, params);
  const double tilt = 0.5 * (2.0 * i - 1.0 - params.n);
  return Potential1D(
      [bg, tilt](double x) {
        const ValueSlope m = bg.minus_potential_with_field(x);
        return ValueSlope{tilt * x + m.value, tilt + m.slope};
      },
      bg.form(), -kInf, kInf, bg.breakpoints());
}

}  // namespace jellium
