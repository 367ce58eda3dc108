#include "jellium/logconcave.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "jellium/error.hpp"

namespace jellium {

namespace {

constexpr int kMaxDoublings = 1100;
constexpr std::size_t kFrozenCap = 48;
constexpr std::size_t kScratchCap = 24;
constexpr int kMaxArsRounds = 100000;

using Node = ArsEnvelope::Node;

double log_diff_exp_segment(double slope, double width) {
  // log of int_0^width exp(-|slope| y) dy, stable for tiny and huge width.
  const double a = std::abs(slope);
  if (a * width < 1e-12) return std::log(width);
  if (std::isinf(width)) return -std::log(a);
  return std::log(-std::expm1(-a * width)) - std::log(a);
}

}  // namespace

void ArsEnvelope::reset(double lo, double hi) {
  lo_ = lo;
  hi_ = hi;
  nodes_.clear();
}

bool ArsEnvelope::add(Node node, std::size_t cap) {
  if (nodes_.size() >= cap) return false;
  auto it = std::lower_bound(nodes_.begin(), nodes_.end(), node.x,
                             [](const Node& a, double x) { return a.x < x; });
  if (it != nodes_.end() && it->x == node.x) return false;
  nodes_.insert(it, node);
  return true;
}

void ArsEnvelope::rebuild() {
  const std::size_t k = nodes_.size();
  cuts_.assign(k + 1, 0.0);
  cuts_.front() = lo_;
  cuts_.back() = hi_;
  for (std::size_t j = 0; j + 1 < k; ++j) {
    const Node& p = nodes_[j];
    const Node& q = nodes_[j + 1];
    const double gap = p.dh - q.dh;
    double z;
    if (gap > 1e-12 * (std::abs(p.dh) + std::abs(q.dh)) && gap > 0) {
      z = p.x + (q.h - p.h - q.dh * (q.x - p.x)) / gap;
      if (!(z >= p.x)) z = p.x;
      if (!(z <= q.x)) z = q.x;
    } else {
      z = 0.5 * (p.x + q.x);
    }
    cuts_[j + 1] = z;
  }

  log_mass_.assign(k, -kInf);
  double peak = -kInf;
  for (std::size_t j = 0; j < k; ++j) {
    const Node& p = nodes_[j];
    const double zl = cuts_[j];
    const double zr = cuts_[j + 1];
    const double width = zr - zl;
    if (!(width > 0)) continue;
    double lm;
    if (std::isinf(zl) && std::isinf(zr)) {
      throw NonNormalizableDensity("envelope over the whole line needs two nodes");
    } else if (std::isinf(zl)) {
      if (!(p.dh > 0)) throw NonNormalizableDensity("density does not decay to the left");
      lm = p.h + p.dh * (zr - p.x) - std::log(p.dh);
    } else if (std::isinf(zr)) {
      if (!(p.dh < 0)) throw NonNormalizableDensity("density does not decay to the right");
      lm = p.h + p.dh * (zl - p.x) - std::log(-p.dh);
    } else {
      const double top = p.h + p.dh * ((p.dh > 0 ? zr : zl) - p.x);
      lm = top + log_diff_exp_segment(p.dh, width);
    }
    log_mass_[j] = lm;
    peak = std::max(peak, lm);
  }
  if (!std::isfinite(peak)) throw NonNormalizableDensity("envelope has no mass");

  cum_.assign(k, 0.0);
  double total = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    total += std::exp(log_mass_[j] - peak);
    cum_[j] = total;
  }
  for (auto& c : cum_) c /= total;
  log_total_ = peak + std::log(total);
}

double ArsEnvelope::draw(Rng& rng, double* log_envelope) const {
  const double u = rng.uniform();
  std::size_t j = static_cast<std::size_t>(std::upper_bound(cum_.begin(), cum_.end(), u) - cum_.begin());
  if (j >= nodes_.size()) j = nodes_.size() - 1;
  while (!std::isfinite(log_mass_[j]) && j > 0) --j;

  const Node& p = nodes_[j];
  const double zl = cuts_[j];
  const double zr = cuts_[j + 1];
  const double width = zr - zl;
  const double v = rng.uniform();
  double x;
  const double a = std::abs(p.dh);
  if (a * width < 1e-12) {
    x = zl + v * width;
  } else if (p.dh > 0) {
    // Mass piles up against zr: x = zr - y with y a truncated exponential.
    x = zr + std::log1p(v * std::expm1(-a * width)) / a;
  } else {
    x = zl - std::log1p(v * std::expm1(-a * width)) / a;
  }
  x = std::clamp(x, zl, zr);
  *log_envelope = p.h + p.dh * (x - p.x);
  return x;
}

ParticleLaw::ParticleLaw(Potential1D potential, double beta, double lo, double hi)
    : potential_(std::move(potential)), beta_(beta) {
  if (!(beta_ > 0) || !std::isfinite(beta_)) {
    throw NonNormalizableDensity("beta must be positive and finite");
  }
  lo_ = std::max(lo, potential_.lower());
  hi_ = std::min(hi, potential_.upper());
  if (!(lo_ < hi_)) throw NonNormalizableDensity("empty support window");

  const auto slope = [this](double x) { return potential_.derivative(x); };
  const double centre = std::isfinite(lo_) ? lo_ : (std::isfinite(hi_) ? hi_ : 0.0);

  if (std::isfinite(lo_) && slope(lo_) >= 0) {
    mode_ = lo_;
  } else if (std::isfinite(hi_) && slope(hi_) <= 0) {
    mode_ = hi_;
  } else {
    double a = lo_;
    double b = hi_;
    if (!std::isfinite(a)) {
      double step = 1.0;
      a = centre - step;
      int it = 0;
      while (slope(a) >= 0) {
        if (++it > kMaxDoublings) {
          throw NonNormalizableDensity("exp(-beta V) is not integrable: V does not grow to the left");
        }
        step *= 2;
        a = centre - step;
      }
    }
    if (!std::isfinite(b)) {
      double step = 1.0;
      b = centre + step;
      int it = 0;
      while (slope(b) <= 0) {
        if (++it > kMaxDoublings) {
          throw NonNormalizableDensity("exp(-beta V) is not integrable: V does not grow to the right");
        }
        step *= 2;
        b = centre + step;
      }
    }
    for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, std::abs(a) + std::abs(b)); ++it) {
      const double mid = 0.5 * (a + b);
      if (slope(mid) < 0) {
        a = mid;
      } else {
        b = mid;
      }
    }
    mode_ = 0.5 * (a + b);
  }
  h_mode_ = h(mode_);

  const auto find_step = [this](double direction, double wall) {
    double d = 1e-9 * std::max(1.0, std::abs(mode_));
    for (int it = 0; it < 4 * kMaxDoublings; ++it) {
      const double x = mode_ + direction * d;
      if (direction < 0 ? x <= wall : x >= wall) return std::abs(wall - mode_);
      if (h(x) <= h_mode_ - 1.0) return d;
      d *= 2;
    }
    throw NonNormalizableDensity("exp(-beta V) is not integrable");
  };
  left_step_ = find_step(-1.0, lo_);
  right_step_ = find_step(1.0, hi_);

  // Adapt the shared envelope once with a private stream, then freeze it.
  seed_envelope(frozen_, lo_, hi_);
  Rng warmup(0x6a656c6c69756dULL, 0);
  for (int i = 0; i < 400 && frozen_.size() < kFrozenCap; ++i) run_ars(frozen_, warmup, kFrozenCap);
}

ArsEnvelope::Node ParticleLaw::node(double x) const {
  const ValueSlope v = potential_.eval(x);
  return {x, -beta_ * v.value, -beta_ * v.slope};
}

void ParticleLaw::seed_envelope(ArsEnvelope& env, double a, double b) const {
  env.reset(a, b);
  const double candidates[] = {mode_ - left_step_, mode_, mode_ + right_step_};
  for (double c : candidates) env.add(node(std::clamp(c, a, b)), kFrozenCap);
  if (std::isfinite(a)) env.add(node(a), kFrozenCap);
  if (std::isfinite(b)) env.add(node(b), kFrozenCap);
  env.rebuild();
}

double ParticleLaw::run_ars(ArsEnvelope& env, Rng& rng, std::size_t cap) const {
  for (int round = 0; round < kMaxArsRounds; ++round) {
    double log_env;
    const double x = env.draw(rng, &log_env);
    const Node n = node(x);
    if (std::log(rng.uniform_pos()) <= n.h - log_env) return x;
    if (env.add(n, cap)) env.rebuild();
  }
  throw MaxAttemptsExceeded("adaptive rejection did not accept", kMaxArsRounds);
}

double ParticleLaw::sample(Rng& rng) const {
  for (int round = 0; round < kMaxArsRounds; ++round) {
    double log_env;
    const double x = frozen_.draw(rng, &log_env);
    if (std::log(rng.uniform_pos()) <= h(x) - log_env) return x;
  }
  throw MaxAttemptsExceeded("rejection from the frozen envelope did not accept", kMaxArsRounds);
}

double ParticleLaw::sample_truncated(double a, double b, Rng& rng, ArsEnvelope& scratch) const {
  a = std::max(a, lo_);
  b = std::min(b, hi_);
  if (a > b) throw NonNormalizableDensity("empty truncation window");
  if (a == b) return a;
  seed_envelope(scratch, a, b);
  return run_ars(scratch, rng, kScratchCap);
}

double ParticleLaw::log_normalizer() const {
  using boost::math::quadrature::gauss_kronrod;
  const auto reach = [this](double direction, double step, double wall) {
    double x = mode_;
    std::vector<double> grid;
    if (step <= 0) return grid;
    for (int it = 0; it < kMaxDoublings; ++it) {
      x = mode_ + direction * step;
      if (direction < 0 ? x <= wall : x >= wall) {
        grid.push_back(wall);
        return grid;
      }
      grid.push_back(x);
      if (h(x) < h_mode_ - 45.0) return grid;
      step *= 2;
    }
    return grid;
  };
  std::vector<double> cuts = reach(-1.0, left_step_, lo_);
  const std::vector<double> right = reach(1.0, right_step_, hi_);
  cuts.insert(cuts.end(), right.begin(), right.end());
  cuts.push_back(mode_);
  const double xl = *std::min_element(cuts.begin(), cuts.end());
  const double xr = *std::max_element(cuts.begin(), cuts.end());
  for (double bp : potential_.breakpoints()) {
    if (bp > xl && bp < xr) cuts.push_back(bp);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  const auto f = [this](double x) { return std::exp(h(x) - h_mode_); };
  double total = 0.0;
  for (std::size_t j = 0; j + 1 < cuts.size(); ++j) {
    total += gauss_kronrod<double, 31>::integrate(f, cuts[j], cuts[j + 1], 12, 1e-13);
  }
  // Tangent bounds for what lies beyond the e^-45 cut; negligible but kept.
  if (xl > lo_) {
    const Node n = node(xl);
    total += std::exp(n.h - h_mode_) / n.dh * -std::expm1(-n.dh * (xl - lo_));
  }
  if (xr < hi_) {
    const Node n = node(xr);
    total += std::exp(n.h - h_mode_) / -n.dh * -std::expm1(n.dh * (hi_ - xr));
  }
  return h_mode_ + std::log(total);
}

}  // namespace jellium
