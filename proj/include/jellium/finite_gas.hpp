#pragma once

#include <span>
#include <vector>

#include "jellium/background.hpp"
#include "jellium/ordered.hpp"
#include "jellium/rng.hpp"
#include "jellium/types.hpp"

namespace jellium {

// H_n = -1/2 sum_{i<j} |x_i - x_j| - alpha sum_i U(x_i), by the O(n^2) sum.
double energy_pairwise(std::span<const double> positions, const Background& bg, const GasParams& params);

// The same energy from descending positions via the order-statistic identity:
// sum_k [((2k - n - 1)/2) x_(k) - alpha U(x_(k))]. Throws UnsortedInput.
double energy_ordered(std::span<const double> positions, const Background& bg, const GasParams& params);

// Number of strictly positive coordinates.
int count_right_of_zero(std::span<const double> positions);

// The n-particle gas as an ordered product of the laws exp(-beta V_i).
// Building it validates admissibility and prepares every per-particle law.
class FiniteGas {
 public:
  FiniteGas(Background bg, GasParams params);

  const Background& background() const noexcept { return bg_; }
  const GasParams& params() const noexcept { return params_; }
  const OrderedProduct& product() const noexcept { return product_; }

  // Exact draw of Y_i, with density proportional to exp(-beta V_i).
  double sample_independent(int i, Rng& rng) const { return product_.law(i).sample(rng); }

  Configuration make_configuration(std::vector<double> descending) const;

 private:
  Background bg_;
  GasParams params_;
  OrderedProduct product_;
};

// One-shot form; prefer FiniteGas when drawing repeatedly.
double sample_independent(const Background& bg, const GasParams& params, int i, Rng& rng);

struct RejectionDraw {
  Configuration config;
  double acceptance_rate = 1.0;
  long long attempts = 1;
};

inline constexpr long long kDefaultMaxAttempts = 10'000'000;

RejectionDraw sample_gas_rejection(const FiniteGas& gas, Rng& rng, long long max_attempts = kDefaultMaxAttempts);

struct GibbsOptions {
  long long sweeps = 2000;   // total, including burn-in
  long long burn_in = 1000;
  long long thin = 10;
  std::vector<double> initial;  // empty: descending modes
};

// States after burn-in, every `thin`-th sweep.
std::vector<Configuration> sample_gas_gibbs(const FiniteGas& gas, Rng& rng, const GibbsOptions& options);

// Example-1.1 representation: independent Gaussians with mean
// (a+b)/2 + (b-a)(n+1-2k)/(2 alpha) and variance (b-a)/(alpha beta),
// accepted iff a <= Y_n <= ... <= Y_1 <= b.
RejectionDraw sample_gas_gaussian_conditional(double a, double b, const GasParams& params, Rng& rng,
                                              long long max_attempts = kDefaultMaxAttempts);

struct PartitionEstimate {
  double log_z = 0.0;
  double std_error = 0.0;
  double log_normalizer_sum = 0.0;  // sum_i log z_i
  double order_probability = 0.0;   // Monte Carlo estimate of P(Y_n <= ... <= Y_1)
  long long attempts = 0;
  long long ordered = 0;
};

// log Z_n = log n! + sum_i log z_i + log P(order). The standard error is the
// delta-method error of log P(order) with a (k+1)/(N+2) plug-in, so it stays
// finite when every attempt is ordered.
PartitionEstimate estimate_log_partition(const FiniteGas& gas, Rng& rng, long long samples);

}  // namespace jellium
