#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace jellium {

// Sorted i.i.d. sample with ECDF queries. The ECDF is right-continuous:
// cdf(x) counts samples <= x.
class EmpiricalDistribution {
 public:
  explicit EmpiricalDistribution(std::vector<double> samples);

  std::size_t count() const noexcept { return samples_.size(); }
  std::span<const double> samples() const noexcept { return samples_; }

  double cdf(double x) const;
  double survival(double x) const { return 1.0 - cdf(x); }
  // Smallest sample whose ECDF reaches p.
  double quantile(double p) const;
  double mean() const;
  double variance() const;  // unbiased

 private:
  std::vector<double> samples_;
};

// sup_x |F_p(x) - F_q(x)|, evaluated at every jump of either ECDF.
double ks_statistic(const EmpiricalDistribution& p, const EmpiricalDistribution& q);
// One-sample form against a continuous CDF.
double ks_statistic(const EmpiricalDistribution& p, const std::function<double(double)>& cdf);

// DKW half-width sqrt(ln(2/delta) / (2 count)): with probability at least
// 1 - delta the true CDF lies within it everywhere.
double dkw_band(std::size_t count, double delta);
// Conservative two-sample band: the sum of the one-sample bands.
double dkw_band(std::size_t count_p, std::size_t count_q, double delta);

enum class Dominance { Dominates, Dominated, Crossing, Inconclusive };
std::string to_string(Dominance verdict);

struct DominanceResult {
  Dominance verdict = Dominance::Inconclusive;
  double band = 0.0;
  double max_excess_q = 0.0;  // sup (F_q - F_p): positive when p sits to the right
  double max_excess_p = 0.0;  // sup (F_p - F_q)
};

// p dominates q (p is stochastically larger) when F_p <= F_q + band everywhere
// and F_p < F_q - band somewhere.
DominanceResult dominance_check(const EmpiricalDistribution& p, const EmpiricalDistribution& q, double delta);

// Survival-probability window [survival_lo, survival_hi] for tail fits.
struct TailWindow {
  double survival_lo = 1e-4;
  double survival_hi = 1e-1;
};

struct TailPoint {
  double t;
  double minus_log_survival;
};

struct TailFit {
  double gamma_hypothesis = 1.0;
  double coefficient = 0.0;  // slope of -log S against t^gamma
  double intercept = 0.0;
  double t_lo = 0.0;
  double t_hi = 0.0;
  double r_squared = 0.0;
  std::vector<TailPoint> profile;  // thinned points of the fitted window

  // c_t in -log S(t) = coefficient * t^gamma (1 + c_t), one per profile point.
  std::vector<double> correction(double coefficient_reference) const;
};

// Least-squares fit of -log S_j, S_j = (N - j)/N, against t_j^gamma over the
// window. Throws WindowTooDeep when survival_lo * N < 50.
TailFit tail_exponent_fit(const EmpiricalDistribution& p, double gamma_hypothesis, TailWindow window = {});

// Potential scale reduction factor on equal-length chains.
double gelman_rubin(const std::vector<std::vector<double>>& chains);

struct MeanError {
  double mean = 0.0;
  double std_error = 0.0;
  double variance = 0.0;
};
MeanError mean_with_error(std::span<const double> values);

// Pearson correlation.
double correlation(std::span<const double> a, std::span<const double> b);

}  // namespace jellium
