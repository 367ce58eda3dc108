#pragma once

#include <vector>

#include "jellium/background.hpp"
#include "jellium/finite_gas.hpp"
#include "jellium/rng.hpp"
#include "jellium/types.hpp"

namespace jellium {

// A gas whose background sits in (-inf, 0], conditioned on exactly k particles
// strictly to the right of 0.
struct ConditionalSpec {
  Background bg;
  GasParams params;
  int k = 1;
};

// Throws InadmissibleGas, InvalidBackground (support reaching past 0 or a
// charge mismatch) or IndexOutOfRange (k outside [0, n]).
void validate(const ConditionalSpec& spec);

// Mean 2/(beta i (alpha - n + i)) of the i-th spacing variable.
double renyi_spacing_mean(const GasParams& params, int i);

// (X_(1), ..., X_(k)) given N_n = k, with X_(j) = Z_j + ... + Z_k for
// independent exponentials Z_i of mean renyi_spacing_mean(i). X_(k) = Z_k is
// the particle closest to the edge of the background.
TopKSample sample_renyi_topk(const ConditionalSpec& spec, Rng& rng);

struct MeanVariance {
  double mean = 0.0;
  double variance = 0.0;
};
// Closed-form moments of X_(1), ..., X_(k) under the representation above.
std::vector<MeanVariance> conditional_moments(const ConditionalSpec& spec);

enum class ConditionalStrategy {
  // Each Y_i drawn from its law restricted to the half-line its sign forces
  // ((0, inf) for i <= k, (-inf, 0] otherwise); the two groups are ordered by
  // separate rejection loops.
  SignRestricted,
  // Full ordered gas draws rejected unless exactly k are positive.
  PlainRejection,
};

struct ConditionalReport {
  double event_prob = 0.0;  // P(N_n = k)
  long long accepted = 0;
  long long attempted = 0;
};

// Direct simulation of the finite gas conditioned on N_n = k. Both strategies
// are exact; they differ only in cost.
class ConditionalSampler {
 public:
  explicit ConditionalSampler(ConditionalSpec spec,
                              ConditionalStrategy strategy = ConditionalStrategy::SignRestricted);

  const ConditionalSpec& spec() const noexcept { return spec_; }
  ConditionalStrategy strategy() const noexcept { return strategy_; }

  // Top k of one conditioned configuration (the whole n-vector is drawn).
  // Throws MaxAttemptsExceeded when one draw needs more than max_attempts.
  TopKSample sample(Rng& rng, long long max_attempts = kDefaultMaxAttempts);

  // Counts accumulated over every call to sample. For SignRestricted the event
  // probability is prod_i P(sign_i) P(ordered | signs) / P(ordered), with the
  // middle factor estimated from the attempts and P(ordered) from the grid
  // recursion.
  ConditionalReport report() const;

  // Adds the counters of another sampler built from the same spec, so
  // parallel tasks can pool their reports.
  void absorb(const ConditionalSampler& other);

 private:
  bool draw_group(const std::vector<ParticleLaw>& laws, Rng& rng, std::vector<double>& out) const;

  ConditionalSpec spec_;
  ConditionalStrategy strategy_;
  FiniteGas gas_;
  std::vector<ParticleLaw> right_;  // laws of Y_1..Y_k on (0, inf)
  std::vector<ParticleLaw> left_;   // laws of Y_{k+1}..Y_n on (-inf, 0]
  double log_sign_mass_ = 0.0;      // sum_i log P(sign_i)
  double log_order_prob_ = 0.0;     // log P(Y_n <= ... <= Y_1)
  long long accepted_ = 0;
  long long attempted_ = 0;
  long long right_attempts_ = 0, right_accepts_ = 0;
  long long left_attempts_ = 0, left_accepts_ = 0;
  std::vector<double> scratch_;
};

}  // namespace jellium
