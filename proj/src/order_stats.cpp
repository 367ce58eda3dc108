#include "jellium/order_stats.hpp"

#include <cmath>

#include "jellium/error.hpp"

namespace jellium {

void validate(const ConditionalSpec& spec) {
  require_admissible(spec.params);
  require_matching_charge(spec.bg, spec.params);
  if (spec.bg.support().second > 0) throw InvalidBackground("conditioning needs a background supported in (-inf, 0]");
  if (spec.k < 0 || spec.k > spec.params.n) throw IndexOutOfRange("k must lie in [0, n]");
}

double renyi_spacing_mean(const GasParams& params, int i) {
  return 2.0 / (params.beta * i * (params.alpha - params.n + i));
}

TopKSample sample_renyi_topk(const ConditionalSpec& spec, Rng& rng) {
  validate(spec);
  TopKSample out;
  out.values.assign(static_cast<std::size_t>(spec.k), 0.0);
  out.depth = spec.k;
  double sum = 0.0;
  for (int i = spec.k; i >= 1; --i) {
    sum += renyi_spacing_mean(spec.params, i) * rng.exponential();
    out.values[static_cast<std::size_t>(i - 1)] = sum;
  }
  return out;
}

std::vector<MeanVariance> conditional_moments(const ConditionalSpec& spec) {
  validate(spec);
  std::vector<MeanVariance> out(static_cast<std::size_t>(spec.k));
  MeanVariance acc;
  for (int i = spec.k; i >= 1; --i) {
    const double mu = renyi_spacing_mean(spec.params, i);
    acc.mean += mu;
    acc.variance += mu * mu;
    out[static_cast<std::size_t>(i - 1)] = acc;
  }
  return out;
}

namespace {

FiniteGas checked_gas(const ConditionalSpec& spec) {
  validate(spec);
  return FiniteGas(spec.bg, spec.params);
}

}  // namespace

ConditionalSampler::ConditionalSampler(ConditionalSpec spec, ConditionalStrategy strategy)
    : spec_(std::move(spec)), strategy_(strategy), gas_(checked_gas(spec_)) {
  const int n = spec_.params.n;
  log_order_prob_ = n == 1 ? 0.0 : TransferSampler(gas_.product(), 1).log_order_probability();
  if (strategy_ != ConditionalStrategy::SignRestricted) return;
  for (int i = 1; i <= n; ++i) {
    const ParticleLaw& full = gas_.product().law(i);
    const bool right = i <= spec_.k;
    auto& group = right ? right_ : left_;
    group.emplace_back(full.potential(), spec_.params.beta, right ? 0.0 : -kInf, right ? kInf : 0.0);
    log_sign_mass_ += group.back().log_normalizer() - full.log_normalizer();
  }
}

bool ConditionalSampler::draw_group(const std::vector<ParticleLaw>& laws, Rng& rng, std::vector<double>& out) const {
  double previous = kInf;
  for (const auto& law : laws) {
    const double y = law.sample(rng);
    if (y > previous) return false;
    out.push_back(y);
    previous = y;
  }
  return true;
}

TopKSample ConditionalSampler::sample(Rng& rng, long long max_attempts) {
  const auto k = static_cast<std::size_t>(spec_.k);
  TopKSample out;
  out.depth = spec_.params.n;
  if (strategy_ == ConditionalStrategy::PlainRejection) {
    for (long long a = 0; a < max_attempts; ++a) {
      ++attempted_;
      if (!gas_.product().try_ordered(rng, scratch_)) continue;
      if (count_right_of_zero(scratch_) != spec_.k) continue;
      ++accepted_;
      out.values.assign(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(k));
      return out;
    }
    throw MaxAttemptsExceeded("no draw with the requested count right of 0", max_attempts);
  }

  // The sign constraints split the ordering event into two independent
  // groups, so each is drawn by its own rejection loop.
  long long used = 0;
  std::vector<double> top;
  for (;;) {
    if (used++ >= max_attempts) throw MaxAttemptsExceeded("ordering the right group failed", max_attempts);
    ++right_attempts_;
    top.clear();
    if (draw_group(right_, rng, top)) break;
  }
  ++right_accepts_;
  for (;;) {
    if (used++ >= max_attempts) throw MaxAttemptsExceeded("ordering the left group failed", max_attempts);
    ++left_attempts_;
    scratch_.clear();
    if (draw_group(left_, rng, scratch_)) break;
  }
  ++left_accepts_;
  attempted_ += used;
  ++accepted_;
  out.values = std::move(top);
  return out;
}

void ConditionalSampler::absorb(const ConditionalSampler& other) {
  accepted_ += other.accepted_;
  attempted_ += other.attempted_;
  right_attempts_ += other.right_attempts_;
  right_accepts_ += other.right_accepts_;
  left_attempts_ += other.left_attempts_;
  left_accepts_ += other.left_accepts_;
}

ConditionalReport ConditionalSampler::report() const {
  ConditionalReport r;
  r.accepted = accepted_;
  r.attempted = attempted_;
  if (strategy_ == ConditionalStrategy::PlainRejection) {
    // Attempts include unordered draws, hence the division by P(ordered).
    if (attempted_ > 0) {
      r.event_prob = static_cast<double>(accepted_) / static_cast<double>(attempted_) / std::exp(log_order_prob_);
    }
    return r;
  }
  if (right_attempts_ == 0 || left_attempts_ == 0) return r;
  const double p_right = static_cast<double>(right_accepts_) / static_cast<double>(right_attempts_);
  const double p_left = static_cast<double>(left_accepts_) / static_cast<double>(left_attempts_);
  r.event_prob = std::exp(log_sign_mass_ - log_order_prob_) * p_right * p_left;
  return r;
}

}  // namespace jellium
