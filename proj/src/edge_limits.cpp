#include "jellium/edge_limits.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/constants/constants.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/polygamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include "jellium/error.hpp"
#include "jellium/finite_gas.hpp"

namespace jellium {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr double kSmallShift = 1e-4;
constexpr long long kPilotAttempts = 4000;
constexpr double kPilotAcceptance = 2e-3;

// sum_{i > m} i^-s via polygamma, s >= 2.
double zeta_tail(int s, double m) {
  const double sign = (s % 2 == 0) ? 1.0 : -1.0;
  return sign * boost::math::polygamma(s - 1, m + 1.0) / std::tgamma(static_cast<double>(s));
}

// sum_{i > m} 1/(i (c + i)).
double tail_sum(double c, double m) {
  if (std::abs(c) < kSmallShift) return zeta_tail(2, m) - c * zeta_tail(3, m) + c * c * zeta_tail(4, m);
  return (boost::math::digamma(m + 1.0 + c) - boost::math::digamma(m + 1.0)) / c;
}

// sum_{i > m} 1/(i (c + i))^2.
double tail_sum_squares(double c, double m) {
  if (std::abs(c) < kSmallShift) {
    return zeta_tail(4, m) - 2 * c * zeta_tail(5, m) + 3 * c * c * zeta_tail(6, m);
  }
  return (boost::math::trigamma(m + 1.0) + boost::math::trigamma(m + 1.0 + c) - 2 * tail_sum(c, m)) / (c * c);
}

void require_lambda(double lambda) {
  if (!(lambda > 0) || !std::isfinite(lambda)) throw InvalidBackground("lambda must be positive");
}

void require_beta(double beta) {
  if (!(beta > 0) || !std::isfinite(beta)) throw InvalidBackground("beta must be positive");
}

std::vector<ParticleLaw> family_laws(const LimitFamily& family, int m) {
  std::vector<ParticleLaw> laws;
  laws.reserve(static_cast<std::size_t>(m));
  for (int i = 1; i <= m; ++i) laws.emplace_back(limit_potential(family, i), family.beta);
  return laws;
}

// Partial sums of (2/beta) a_i Z_i from i = m down to 1, keeping the top k.
TopKSample halfwell_partial_sums(double lambda, double beta, int k, long long m, double tail, Rng& rng) {
  const double c = 2 * lambda - 1;
  TopKSample out;
  out.values.assign(static_cast<std::size_t>(k), 0.0);
  out.depth = m;
  double sum = tail;
  for (long long i = m; i >= 1; --i) {
    const double di = static_cast<double>(i);
    sum += rng.exponential() / (di * (c + di));
    if (i <= k) out.values[static_cast<std::size_t>(i - 1)] = 2.0 / beta * sum;
  }
  return out;
}

}  // namespace

std::string describe(const LimitFamily& family) {
  std::ostringstream os;
  std::visit(Overloaded{
                 [&](const HalfWell& h) { os << "HalfWell(lambda=" << h.lambda << ")"; },
                 [&](const SquaredZero& s) { os << "SquaredZero(lambda=" << s.lambda << ")"; },
                 [&](const SquaredGamma& g) { os << "SquaredGamma(gamma=" << g.gamma << ")"; },
             },
             family.shape);
  os << ", beta=" << family.beta;
  return os.str();
}

Potential1D limit_potential(const LimitFamily& family, int i) {
  require_beta(family.beta);
  if (i < 1) throw IndexOutOfRange("particle index must be at least 1");
  return std::visit(
      Overloaded{
          [i](const HalfWell& h) {
            require_lambda(h.lambda);
            const double tilt = i - 1 + h.lambda;
            return Potential1D([tilt](double x) { return ValueSlope{tilt * x, tilt}; }, PotentialForm::LimitClosed,
                               0.0, kInf, {0.0});
          },
          [i](const SquaredZero& s) {
            require_lambda(s.lambda);
            const double tilt = i - 1 + s.lambda;
            return Potential1D(
                [tilt](double x) {
                  return x < 0 ? ValueSlope{tilt * x + 0.5 * x * x, tilt + x} : ValueSlope{tilt * x, tilt};
                },
                PotentialForm::LimitClosed, -kInf, kInf, {0.0});
          },
          [i](const SquaredGamma& g) {
            if (!(g.gamma > 1)) throw InvalidBackground("gamma must be greater than 1");
            const double tilt = i - 0.5;
            const double gamma = g.gamma;
            return Potential1D(
                [tilt, gamma](double x) {
                  if (x < 0) return ValueSlope{tilt * x + 0.5 * x * x, tilt + x};
                  const double p = std::pow(x, gamma - 1);
                  return ValueSlope{tilt * x + p * x / gamma, tilt + p};
                },
                PotentialForm::LimitClosed, -kInf, kInf, {0.0});
          },
      },
      family.shape);
}

HalfWell dominating_halfwell(const LimitFamily& family) {
  return std::visit(Overloaded{
                        [](const HalfWell& h) { return h; },
                        [](const SquaredZero& s) { return HalfWell{s.lambda}; },
                        [](const SquaredGamma&) { return HalfWell{0.5}; },
                    },
                    family.shape);
}

double halfwell_tail_mean(double lambda, double beta, long long m) {
  require_lambda(lambda);
  require_beta(beta);
  return 2.0 / beta * tail_sum(2 * lambda - 1, static_cast<double>(m));
}

double halfwell_tail_variance(double lambda, double beta, long long m) {
  require_lambda(lambda);
  require_beta(beta);
  return 4.0 / (beta * beta) * tail_sum_squares(2 * lambda - 1, static_cast<double>(m));
}

TopKSample sample_halfwell_topk(double lambda, double beta, int k, double eps, Rng& rng) {
  require_lambda(lambda);
  require_beta(beta);
  if (k < 1) throw IndexOutOfRange("k must be at least 1");
  if (!(eps > 0)) throw IndexOutOfRange("eps must be positive");
  // The depth search costs a few dozen special-function calls, so repeated
  // draws with the same parameters reuse the last result.
  struct Cached {
    double lambda = 0, beta = 0, eps = 0;
    int k = 0;
    long long depth = 0;
    double tail = 0;
  };
  thread_local Cached cache;
  if (cache.lambda != lambda || cache.beta != beta || cache.eps != eps || cache.k != k) {
    // Smallest M >= k whose dropped variance is below eps: doubling, then bisection.
    long long hi = std::max<long long>(k, 1);
    while (halfwell_tail_variance(lambda, beta, hi) >= eps) hi *= 2;
    long long lo = std::max<long long>(k, hi / 2);
    if (halfwell_tail_variance(lambda, beta, lo) < eps) hi = lo;
    while (hi - lo > 1) {
      const long long mid = lo + (hi - lo) / 2;
      if (halfwell_tail_variance(lambda, beta, mid) < eps) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    cache = {lambda, beta, eps, k, hi, tail_sum(2 * lambda - 1, static_cast<double>(hi))};
  }
  const long long hi = cache.depth;
  const double tail = cache.tail;
  return halfwell_partial_sums(lambda, beta, k, hi, tail, rng);
}

TopKSample sample_halfwell_topk_at_depth(double lambda, double beta, int k, int m, Rng& rng) {
  require_lambda(lambda);
  require_beta(beta);
  if (k < 1) throw IndexOutOfRange("k must be at least 1");
  if (m < k) throw DepthTooSmall("depth m must be at least k");
  return halfwell_partial_sums(lambda, beta, k, m, 0.0, rng);
}

std::string to_string(LimitStrategy strategy) {
  switch (strategy) {
    case LimitStrategy::Auto: return "Auto";
    case LimitStrategy::Rejection: return "Rejection";
    case LimitStrategy::Gibbs: return "Gibbs";
    case LimitStrategy::Transfer: return "Transfer";
  }
  return "Auto";
}

LimitProcess::LimitProcess(LimitFamily family, int depth_m)
    : family_(std::move(family)),
      product_(depth_m >= 1 ? family_laws(family_, depth_m)
                            : throw DepthTooSmall("depth m must be at least 1")) {}

LimitStrategy LimitProcess::resolve(LimitStrategy requested, Rng& rng) const {
  if (requested != LimitStrategy::Auto) return requested;
  std::vector<double> scratch;
  long long accepted = 0;
  for (long long a = 0; a < kPilotAttempts; ++a) accepted += product_.try_ordered(rng, scratch);
  return static_cast<double>(accepted) / kPilotAttempts >= kPilotAcceptance ? LimitStrategy::Rejection
                                                                           : LimitStrategy::Gibbs;
}

std::vector<TopKSample> LimitProcess::sample(int k, long long count, Rng& rng, const LimitOptions& options) const {
  if (k < 1) throw IndexOutOfRange("k must be at least 1");
  if (k > depth()) throw DepthTooSmall("depth m = " + std::to_string(depth()) + " is below k = " + std::to_string(k));
  std::vector<TopKSample> out;
  out.reserve(static_cast<std::size_t>(std::max<long long>(count, 0)));
  const auto push = [&](const std::vector<double>& state) {
    out.push_back(TopKSample{std::vector<double>(state.begin(), state.begin() + k), depth()});
  };

  // The grid cannot resolve deep half-well particles, which crowd the wall at
  // spacing ~1/i^2, so Transfer falls back to the exact form there as well.
  if (options.strategy == LimitStrategy::Auto || options.strategy == LimitStrategy::Transfer) {
    if (const auto* h = std::get_if<HalfWell>(&family_.shape)) {
      for (long long s = 0; s < count; ++s) {
        out.push_back(sample_halfwell_topk_at_depth(h->lambda, family_.beta, k, depth(), rng));
      }
      return out;
    }
  }
  switch (resolve(options.strategy, rng)) {
    case LimitStrategy::Rejection: {
      for (long long s = 0; s < count; ++s) push(product_.sample_rejection(rng, options.max_attempts));
      break;
    }
    case LimitStrategy::Gibbs: {
      GibbsChain chain(product_, {});
      for (long long b = 0; b < options.burn_in; ++b) chain.sweep(rng);
      for (long long s = 0; s < count; ++s) {
        for (long long t = 0; t < options.thin; ++t) chain.sweep(rng);
        push(chain.state());
      }
      break;
    }
    case LimitStrategy::Transfer: {
      const TransferSampler transfer(product_, k, options.grid_points);
      for (long long s = 0; s < count; ++s) out.push_back(TopKSample{transfer.sample(rng), depth()});
      break;
    }
    case LimitStrategy::Auto: break;
  }
  return out;
}

TopKSample sample_limit_topk(const LimitFamily& family, int k, int depth_m, Rng& rng, long long max_attempts) {
  if (depth_m < k) throw DepthTooSmall("depth m must be at least k");
  const LimitProcess process(family, depth_m);
  LimitOptions options;
  options.strategy = LimitStrategy::Rejection;
  options.max_attempts = max_attempts;
  return process.sample(k, 1, rng, options).front();
}

double gumbel_mean(double chi) {
  if (!(chi > 0)) throw IndexOutOfRange("chi must be positive");
  return boost::math::digamma(1.0 + chi) + boost::math::constants::euler<double>();
}

EmpiricalDistribution gumbel_statistic(double chi, Rng& rng, long long samples, double eps) {
  const double mean = gumbel_mean(chi);
  if (samples < 1) throw IndexOutOfRange("samples must be positive");
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(samples));
  for (long long s = 0; s < samples; ++s) {
    values.push_back(sample_halfwell_topk(0.5 * (chi + 1), 2.0 / chi, 1, eps, rng).values.front() - mean);
  }
  return EmpiricalDistribution(std::move(values));
}

std::string to_string(Regime regime) {
  switch (regime) {
    case Regime::AsymptoticallyNeutral: return "AsymptoticallyNeutral";
    case Regime::Nonneutral: return "Nonneutral";
    case Regime::FixedBackground: return "FixedBackground";
  }
  return "FixedBackground";
}

double regime_alpha(const RegimeSpec& spec, int n) {
  if (spec.regime == Regime::Nonneutral) {
    if (!(spec.alpha_ratio > 1)) throw InvalidBackground("alpha_ratio must exceed 1");
    return spec.alpha_ratio * n;
  }
  require_lambda(spec.lambda);
  return n - 1 + 2 * spec.lambda;
}

Background regime_background(const RegimeSpec& spec, int n) {
  const double alpha = regime_alpha(spec, n);
  switch (spec.regime) {
    case Regime::AsymptoticallyNeutral: return Background::uniform(-alpha, 0.0, alpha);
    case Regime::Nonneutral: return Background::gamma_family(n, alpha, spec.gamma);
    case Regime::FixedBackground: break;
  }
  return Background::fixed_density(spec.rho, alpha);
}

LimitFamily regime_limit(const RegimeSpec& spec) {
  switch (spec.regime) {
    case Regime::AsymptoticallyNeutral: return {SquaredZero{spec.lambda}, spec.beta};
    case Regime::Nonneutral: return {SquaredGamma{spec.gamma}, spec.beta};
    case Regime::FixedBackground: break;
  }
  return {HalfWell{spec.lambda}, spec.beta};
}

FiniteTopK sample_finite_topk(const Background& bg, const GasParams& params, int k, long long samples, Rng& rng,
                              long long burn_in, long long thin) {
  if (k < 1 || k > params.n) throw DepthTooSmall("k must lie in [1, n]");
  const FiniteGas gas(bg, params);
  FiniteTopK out;
  out.columns.assign(static_cast<std::size_t>(k), {});
  for (auto& c : out.columns) c.reserve(static_cast<std::size_t>(samples));
  const auto push = [&](const std::vector<double>& x) {
    for (int j = 0; j < k; ++j) out.columns[static_cast<std::size_t>(j)].push_back(x[static_cast<std::size_t>(j)]);
  };

  std::vector<double> scratch;
  long long accepted = 0;
  for (long long a = 0; a < kPilotAttempts; ++a) accepted += gas.product().try_ordered(rng, scratch);
  out.acceptance = static_cast<double>(accepted) / kPilotAttempts;
  if (out.acceptance >= kPilotAcceptance) {
    out.method = "rejection";
    for (long long s = 0; s < samples; ++s) push(gas.product().sample_rejection(rng, kDefaultMaxAttempts));
  } else {
    out.method = "gibbs";
    GibbsChain chain(gas.product(), {});
    for (long long b = 0; b < burn_in; ++b) chain.sweep(rng);
    for (long long s = 0; s < samples; ++s) {
      for (long long t = 0; t < thin; ++t) chain.sweep(rng);
      push(chain.state());
    }
  }
  return out;
}

namespace {

std::vector<std::vector<double>> limit_columns(const RegimeSpec& spec, int k, long long samples, Rng& rng,
                                               const DistanceOptions& options, std::string* method) {
  std::vector<std::vector<double>> cols(static_cast<std::size_t>(k));
  const LimitFamily family = regime_limit(spec);
  if (const auto* h = std::get_if<HalfWell>(&family.shape)) {
    *method = "halfwell-exact";
    for (long long s = 0; s < samples; ++s) {
      const TopKSample t = sample_halfwell_topk(h->lambda, family.beta, k, options.halfwell_eps, rng);
      for (int j = 0; j < k; ++j) cols[static_cast<std::size_t>(j)].push_back(t.values[static_cast<std::size_t>(j)]);
    }
    return cols;
  }
  const LimitProcess process(family, options.limit_depth);
  LimitOptions lo;
  lo.strategy = options.limit_strategy;
  lo.burn_in = options.burn_in;
  lo.thin = options.thin;
  lo.grid_points = options.grid_points;
  *method = to_string(options.limit_strategy) + "@m=" + std::to_string(options.limit_depth);
  for (const TopKSample& t : process.sample(k, samples, rng, lo)) {
    for (int j = 0; j < k; ++j) cols[static_cast<std::size_t>(j)].push_back(t.values[static_cast<std::size_t>(j)]);
  }
  return cols;
}

}  // namespace

DistanceTable finite_to_limit_distance(const RegimeSpec& spec, int k, const std::vector<int>& n_list,
                                       long long samples, Rng& rng, const DistanceOptions& options) {
  if (k < 1) throw IndexOutOfRange("k must be at least 1");
  if (samples < 1) throw IndexOutOfRange("samples must be positive");
  DistanceTable table;
  table.spec = spec;
  table.k = k;
  table.samples = samples;
  table.band = dkw_band(static_cast<std::size_t>(samples), static_cast<std::size_t>(samples), options.delta);

  const auto limit = limit_columns(spec, k, samples, rng, options, &table.limit_method);
  std::string ignored;
  const auto twin = limit_columns(spec, k, samples, rng, options, &ignored);
  std::vector<EmpiricalDistribution> limit_ecdf;
  for (int j = 0; j < k; ++j) {
    limit_ecdf.emplace_back(limit[static_cast<std::size_t>(j)]);
    table.null_ks.push_back(ks_statistic(limit_ecdf.back(), EmpiricalDistribution(twin[static_cast<std::size_t>(j)])));
  }

  for (int n : n_list) {
    const GasParams params{n, spec.beta, regime_alpha(spec, n)};
    require_admissible(params);
    const FiniteTopK finite =
        sample_finite_topk(regime_background(spec, n), params, k, samples, rng, options.burn_in, options.thin);
    DistanceRow row;
    row.n = n;
    row.finite_method = finite.method;
    row.acceptance = finite.acceptance;
    for (int j = 0; j < k; ++j) {
      row.ks.push_back(ks_statistic(EmpiricalDistribution(finite.columns[static_cast<std::size_t>(j)]),
                                    limit_ecdf[static_cast<std::size_t>(j)]));
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace jellium
