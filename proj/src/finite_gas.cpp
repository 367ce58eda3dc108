#include "jellium/finite_gas.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "jellium/error.hpp"

namespace jellium {

namespace {

void require_size(std::span<const double> positions, const GasParams& params) {
  if (static_cast<int>(positions.size()) != params.n) {
    throw IndexOutOfRange("expected " + std::to_string(params.n) + " positions, got " +
                          std::to_string(positions.size()));
  }
}

std::vector<ParticleLaw> build_laws(const Background& bg, const GasParams& params) {
  std::vector<ParticleLaw> laws;
  laws.reserve(static_cast<std::size_t>(params.n));
  for (int i = 1; i <= params.n; ++i) laws.emplace_back(per_particle_potential(bg, params, i), params.beta);
  return laws;
}

}  // namespace

double energy_pairwise(std::span<const double> positions, const Background& bg, const GasParams& params) {
  require_admissible(params);
  require_matching_charge(bg, params);
  require_size(positions, params);
  double pair = 0.0;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    for (std::size_t j = i + 1; j < positions.size(); ++j) pair += std::abs(positions[i] - positions[j]);
  }
  double field = 0.0;
  for (double x : positions) field += bg.minus_potential(x);
  return -0.5 * pair + field;
}

double energy_ordered(std::span<const double> positions, const Background& bg, const GasParams& params) {
  require_admissible(params);
  require_matching_charge(bg, params);
  require_size(positions, params);
  if (!std::is_sorted(positions.begin(), positions.end(), std::greater<>())) {
    throw UnsortedInput("energy_ordered needs positions sorted in descending order");
  }
  const int n = params.n;
  double total = 0.0;
  for (int k = 1; k <= n; ++k) {
    const double x = positions[static_cast<std::size_t>(k - 1)];
    total += 0.5 * (2.0 * k - n - 1) * x + bg.minus_potential(x);
  }
  return total;
}

int count_right_of_zero(std::span<const double> positions) {
  return static_cast<int>(std::count_if(positions.begin(), positions.end(), [](double x) { return x > 0.0; }));
}

FiniteGas::FiniteGas(Background bg, GasParams params)
    : bg_(std::move(bg)),
      params_(params),
      product_((require_admissible(params), require_matching_charge(bg_, params), build_laws(bg_, params))) {}

Configuration FiniteGas::make_configuration(std::vector<double> descending) const {
  Configuration c;
  c.energy = energy_ordered(descending, bg_, params_);
  c.positions = std::move(descending);
  return c;
}

double sample_independent(const Background& bg, const GasParams& params, int i, Rng& rng) {
  require_admissible(params);
  return ParticleLaw(per_particle_potential(bg, params, i), params.beta).sample(rng);
}

RejectionDraw sample_gas_rejection(const FiniteGas& gas, Rng& rng, long long max_attempts) {
  RejectionDraw out;
  std::vector<double> x = gas.product().sample_rejection(rng, max_attempts, &out.attempts);
  out.acceptance_rate = 1.0 / static_cast<double>(out.attempts);
  out.config = gas.make_configuration(std::move(x));
  return out;
}

std::vector<Configuration> sample_gas_gibbs(const FiniteGas& gas, Rng& rng, const GibbsOptions& options) {
  if (options.thin < 1) throw IndexOutOfRange("thin must be at least 1");
  if (options.burn_in < 0 || options.sweeps <= options.burn_in) {
    throw IndexOutOfRange("Gibbs needs sweeps > burn_in >= 0");
  }
  GibbsChain chain(gas.product(), options.initial);
  std::vector<Configuration> out;
  out.reserve(static_cast<std::size_t>((options.sweeps - options.burn_in) / options.thin + 1));
  for (long long s = 1; s <= options.sweeps; ++s) {
    chain.sweep(rng);
    if (s > options.burn_in && (s - options.burn_in) % options.thin == 0) {
      out.push_back(gas.make_configuration(chain.state()));
    }
  }
  return out;
}

RejectionDraw sample_gas_gaussian_conditional(double a, double b, const GasParams& params, Rng& rng,
                                              long long max_attempts) {
  require_admissible(params);
  const Background bg = Background::uniform(a, b, params.alpha);
  const int n = params.n;
  const double sd = std::sqrt((b - a) / (params.alpha * params.beta));
  std::vector<double> y(static_cast<std::size_t>(n));
  for (long long attempt = 1; attempt <= max_attempts; ++attempt) {
    double previous = b;
    bool ok = true;
    for (int k = 1; k <= n && ok; ++k) {
      const double mean = 0.5 * (a + b) + (b - a) * (n + 1 - 2 * k) / (2 * params.alpha);
      const double v = mean + sd * standard_normal(rng);
      ok = v <= previous && v >= a;
      y[static_cast<std::size_t>(k - 1)] = v;
      previous = v;
    }
    if (ok) {
      RejectionDraw out;
      out.attempts = attempt;
      out.acceptance_rate = 1.0 / static_cast<double>(attempt);
      out.config.energy = energy_ordered(y, bg, params);
      out.config.positions = y;
      return out;
    }
  }
  throw MaxAttemptsExceeded("no ordered Gaussian draw inside [a, b] within the attempt budget", max_attempts);
}

PartitionEstimate estimate_log_partition(const FiniteGas& gas, Rng& rng, long long samples) {
  if (samples < 1) throw IndexOutOfRange("estimate_log_partition needs at least one sample");
  PartitionEstimate est;
  const int n = gas.params().n;
  for (int i = 1; i <= n; ++i) est.log_normalizer_sum += gas.product().law(i).log_normalizer();

  std::vector<double> scratch;
  if (n == 1) {
    est.ordered = samples;
    est.attempts = samples;
  } else {
    for (long long s = 0; s < samples; ++s) est.ordered += gas.product().try_ordered(rng, scratch);
    est.attempts = samples;
  }
  if (est.ordered == 0) {
    throw MaxAttemptsExceeded("no ordered draw among the Monte Carlo samples", samples);
  }
  const double big_n = static_cast<double>(samples);
  est.order_probability = static_cast<double>(est.ordered) / big_n;
  const double smoothed = (static_cast<double>(est.ordered) + 1.0) / (big_n + 2.0);
  est.std_error = n == 1 ? 0.0 : std::sqrt((1.0 - smoothed) / (big_n * smoothed));
  est.log_z = std::lgamma(n + 1.0) + est.log_normalizer_sum + std::log(est.order_probability);
  return est;
}

}  // namespace jellium
