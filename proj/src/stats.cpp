#include "jellium/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "jellium/error.hpp"

namespace jellium {

namespace {

constexpr double kMinTailCount = 50.0;
constexpr std::size_t kProfilePoints = 200;

double signed_power(double t, double gamma) { return std::copysign(std::pow(std::abs(t), gamma), t); }

}  // namespace

EmpiricalDistribution::EmpiricalDistribution(std::vector<double> samples) : samples_(std::move(samples)) {
  if (samples_.empty()) throw IndexOutOfRange("empirical distribution needs at least one sample");
  std::sort(samples_.begin(), samples_.end());
}

double EmpiricalDistribution::cdf(double x) const {
  const auto it = std::upper_bound(samples_.begin(), samples_.end(), x);
  return static_cast<double>(it - samples_.begin()) / static_cast<double>(samples_.size());
}

double EmpiricalDistribution::quantile(double p) const {
  const double n = static_cast<double>(samples_.size());
  auto idx = static_cast<std::size_t>(std::ceil(std::clamp(p, 0.0, 1.0) * n));
  idx = idx == 0 ? 0 : idx - 1;
  return samples_[std::min(idx, samples_.size() - 1)];
}

double EmpiricalDistribution::mean() const { return mean_with_error(samples_).mean; }
double EmpiricalDistribution::variance() const { return mean_with_error(samples_).variance; }

double ks_statistic(const EmpiricalDistribution& p, const EmpiricalDistribution& q) {
  const auto a = p.samples();
  const auto b = q.samples();
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  // Step through the merged jump points, consuming ties on both sides first.
  while (i < a.size() || j < b.size()) {
    double x;
    if (j >= b.size() || (i < a.size() && a[i] <= b[j])) {
      x = a[i];
    } else {
      x = b[j];
    }
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double ks_statistic(const EmpiricalDistribution& p, const std::function<double(double)>& cdf) {
  const auto a = p.samples();
  const double n = static_cast<double>(a.size());
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double f = cdf(a[i]);
    d = std::max({d, std::abs(static_cast<double>(i + 1) / n - f), std::abs(f - static_cast<double>(i) / n)});
  }
  return d;
}

double dkw_band(std::size_t count, double delta) {
  if (count == 0) throw IndexOutOfRange("DKW band needs a positive count");
  if (!(delta > 0) || delta > 1) throw IndexOutOfRange("DKW level must lie in (0, 1]");
  return std::sqrt(std::log(2.0 / delta) / (2.0 * static_cast<double>(count)));
}

double dkw_band(std::size_t count_p, std::size_t count_q, double delta) {
  return dkw_band(count_p, delta) + dkw_band(count_q, delta);
}

std::string to_string(Dominance verdict) {
  switch (verdict) {
    case Dominance::Dominates: return "Dominates";
    case Dominance::Dominated: return "Dominated";
    case Dominance::Crossing: return "Crossing";
    case Dominance::Inconclusive: return "Inconclusive";
  }
  return "Inconclusive";
}

DominanceResult dominance_check(const EmpiricalDistribution& p, const EmpiricalDistribution& q, double delta) {
  DominanceResult r;
  r.band = dkw_band(p.count(), q.count(), delta);
  const auto a = p.samples();
  const auto b = q.samples();
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() || j < b.size()) {
    const double x = (j >= b.size() || (i < a.size() && a[i] <= b[j])) ? a[i] : b[j];
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    const double diff = static_cast<double>(i) / na - static_cast<double>(j) / nb;
    r.max_excess_p = std::max(r.max_excess_p, diff);
    r.max_excess_q = std::max(r.max_excess_q, -diff);
  }
  const bool p_right = r.max_excess_q > r.band;  // F_p < F_q - band somewhere
  const bool p_left = r.max_excess_p > r.band;   // F_p > F_q + band somewhere
  if (p_right && p_left) {
    r.verdict = Dominance::Crossing;
  } else if (p_right) {
    r.verdict = Dominance::Dominates;
  } else if (p_left) {
    r.verdict = Dominance::Dominated;
  }
  return r;
}

std::vector<double> TailFit::correction(double coefficient_reference) const {
  std::vector<double> c;
  c.reserve(profile.size());
  for (const auto& pt : profile) {
    c.push_back(pt.minus_log_survival / (coefficient_reference * signed_power(pt.t, gamma_hypothesis)) - 1.0);
  }
  return c;
}

TailFit tail_exponent_fit(const EmpiricalDistribution& p, double gamma_hypothesis, TailWindow window) {
  if (!(window.survival_lo > 0) || !(window.survival_lo < window.survival_hi) || window.survival_hi > 1) {
    throw IndexOutOfRange("tail window needs 0 < survival_lo < survival_hi <= 1");
  }
  if (!(gamma_hypothesis > 0)) throw IndexOutOfRange("tail exponent must be positive");
  const auto x = p.samples();
  const double n = static_cast<double>(x.size());
  if (window.survival_lo * n < kMinTailCount) {
    throw WindowTooDeep("survival " + std::to_string(window.survival_lo) + " at the window end leaves fewer than " +
                        std::to_string(static_cast<int>(kMinTailCount)) + " samples beyond it");
  }
  // With 1-based ascending index j, S_j = (N - j)/N.
  const auto first = static_cast<std::size_t>(std::ceil(n * (1.0 - window.survival_hi)));
  const auto last = static_cast<std::size_t>(std::floor(n * (1.0 - window.survival_lo)));
  double su = 0, sy = 0, suu = 0, suy = 0, syy = 0;
  std::size_t m = 0;
  for (std::size_t j = std::max<std::size_t>(first, 1); j <= last && j < x.size(); ++j) {
    const double u = signed_power(x[j - 1], gamma_hypothesis);
    const double y = -std::log((n - static_cast<double>(j)) / n);
    su += u;
    sy += y;
    suu += u * u;
    suy += u * y;
    syy += y * y;
    ++m;
  }
  if (m < 3) throw WindowTooDeep("tail window holds fewer than three points");
  const double md = static_cast<double>(m);
  const double cuu = suu - su * su / md;
  const double cuy = suy - su * sy / md;
  const double cyy = syy - sy * sy / md;
  TailFit fit;
  fit.gamma_hypothesis = gamma_hypothesis;
  fit.coefficient = cuu > 0 ? cuy / cuu : 0.0;
  fit.intercept = (sy - fit.coefficient * su) / md;
  fit.r_squared = (cuu > 0 && cyy > 0) ? cuy * cuy / (cuu * cyy) : 0.0;
  const std::size_t lo_index = std::max<std::size_t>(first, 1);
  const std::size_t hi_index = std::min(last, x.size() - 1);
  fit.t_lo = x[lo_index - 1];
  fit.t_hi = x[hi_index - 1];
  // Profile on a geometric grid of survival levels.
  for (std::size_t k = 0; k < kProfilePoints; ++k) {
    const double s = window.survival_hi *
                     std::pow(window.survival_lo / window.survival_hi, static_cast<double>(k) / (kProfilePoints - 1));
    auto j = static_cast<std::size_t>(std::llround(n * (1.0 - s)));
    j = std::clamp(j, lo_index, hi_index);
    fit.profile.push_back({x[j - 1], -std::log((n - static_cast<double>(j)) / n)});
  }
  return fit;
}

double gelman_rubin(const std::vector<std::vector<double>>& chains) {
  if (chains.size() < 2) throw IndexOutOfRange("Gelman-Rubin needs at least two chains");
  const std::size_t len = chains.front().size();
  if (len < 2) throw IndexOutOfRange("chains need at least two states");
  for (const auto& c : chains) {
    if (c.size() != len) throw IndexOutOfRange("chains must have equal length");
  }
  const double m = static_cast<double>(chains.size());
  const double n = static_cast<double>(len);
  std::vector<double> means;
  double within = 0.0;
  for (const auto& c : chains) {
    const MeanError me = mean_with_error(c);
    means.push_back(me.mean);
    within += me.variance;
  }
  within /= m;
  const double grand = std::accumulate(means.begin(), means.end(), 0.0) / m;
  double between = 0.0;
  for (double mu : means) between += (mu - grand) * (mu - grand);
  between *= n / (m - 1);
  const double pooled = (n - 1) / n * within + between / n;
  return std::sqrt(pooled / within);
}

MeanError mean_with_error(std::span<const double> values) {
  MeanError r;
  if (values.empty()) return r;
  // Welford for stability on long runs.
  double mean = 0.0;
  double m2 = 0.0;
  std::size_t k = 0;
  for (double v : values) {
    ++k;
    const double d = v - mean;
    mean += d / static_cast<double>(k);
    m2 += d * (v - mean);
  }
  r.mean = mean;
  r.variance = k > 1 ? m2 / static_cast<double>(k - 1) : 0.0;
  r.std_error = std::sqrt(r.variance / static_cast<double>(k));
  return r;
}

double correlation(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = std::min(a.size(), b.size());
  if (n < 2) return 0.0;
  const MeanError ma = mean_with_error(a.first(n));
  const MeanError mb = mean_with_error(b.first(n));
  double cov = 0.0;
  for (std::size_t i = 0; i < n; ++i) cov += (a[i] - ma.mean) * (b[i] - mb.mean);
  cov /= static_cast<double>(n - 1);
  return cov / std::sqrt(ma.variance * mb.variance);
}

}  // namespace jellium
