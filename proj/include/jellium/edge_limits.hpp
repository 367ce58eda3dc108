#pragma once

#include <string>
#include <variant>
#include <vector>

#include "jellium/background.hpp"
#include "jellium/ordered.hpp"
#include "jellium/rng.hpp"
#include "jellium/stats.hpp"
#include "jellium/types.hpp"

namespace jellium {

// (i - 1 + lambda) x on [0, inf), hard wall at 0.
struct HalfWell {
  double lambda = 1.0;
};
// (i - 1 + lambda) x + x^2/2 for x < 0.
struct SquaredZero {
  double lambda = 1.0;
};
// (i - 1/2) x + x^2/2 for x < 0 and x^gamma/gamma for x > 0.
struct SquaredGamma {
  double gamma = 2.0;
};

struct LimitFamily {
  std::variant<HalfWell, SquaredZero, SquaredGamma> shape;
  double beta = 1.0;
};

std::string describe(const LimitFamily& family);

// The potential of Y_i in the family (1-based i). Throws InvalidBackground for
// lambda <= 0 or gamma <= 1.
Potential1D limit_potential(const LimitFamily& family, int i);

// The half-well gas whose tilts dominate the family's: the same lambda for
// HalfWell and SquaredZero, lambda = 1/2 for SquaredGamma. Its top-k law is
// an upper bound in distribution for every depth.
HalfWell dominating_halfwell(const LimitFamily& family);

// Exact sampler of the infinite half-well gas. X_(j) = (2/beta) sum_{i>=j}
// Z_i / (i (2 lambda - 1 + i)); terms beyond M are replaced by their exact
// mean, with M the first index where the variance of the dropped part is
// below eps. `depth` in the result is M.
TopKSample sample_halfwell_topk(double lambda, double beta, int k, double eps, Rng& rng);

// Exact half-well gas conditioned at finite depth m: the same sum stopped at m.
TopKSample sample_halfwell_topk_at_depth(double lambda, double beta, int k, int m, Rng& rng);

// Mean of (2/beta) sum_{i>M} 1/(i(c+i)) with c = 2 lambda - 1, in closed form.
double halfwell_tail_mean(double lambda, double beta, long long m);
// Variance of the same remainder, (2/beta)^2 sum_{i>M} 1/(i(c+i))^2.
double halfwell_tail_variance(double lambda, double beta, long long m);

enum class LimitStrategy { Auto, Rejection, Gibbs, Transfer };

std::string to_string(LimitStrategy strategy);

struct LimitOptions {
  LimitStrategy strategy = LimitStrategy::Auto;
  long long max_attempts = 10'000'000;
  long long burn_in = 1000;
  long long thin = 10;
  int grid_points = 40001;
};

// Top-k of Y_1, ..., Y_m conditioned on Y_m <= ... <= Y_1, for a family at
// depth m. Stochastically increasing in m and bounded above by the dominating
// half-well gas.
class LimitProcess {
 public:
  LimitProcess(LimitFamily family, int depth_m);

  const LimitFamily& family() const noexcept { return family_; }
  int depth() const noexcept { return product_.size(); }
  const OrderedProduct& product() const noexcept { return product_; }

  // `count` top-k draws. Auto picks rejection when a pilot run accepts often
  // enough and Gibbs otherwise. Transfer uses the grid recursion. Under Auto
  // and Transfer, HalfWell uses its exact finite-depth form. Throws
  // DepthTooSmall if k > depth.
  std::vector<TopKSample> sample(int k, long long count, Rng& rng, const LimitOptions& options = {}) const;

  // The strategy Auto resolves to for this process.
  LimitStrategy resolve(LimitStrategy requested, Rng& rng) const;

 private:
  LimitFamily family_;
  OrderedProduct product_;
};

// One draw, by rejection at depth m.
TopKSample sample_limit_topk(const LimitFamily& family, int k, int depth_m, Rng& rng,
                             long long max_attempts = 10'000'000);

// Centered M_chi: the top of the half-well gas with beta = 2/chi and
// lambda = (chi+1)/2, minus E M_chi = digamma(1+chi) + Euler's gamma. The tail
// is truncated so the dropped variance is below eps.
EmpiricalDistribution gumbel_statistic(double chi, Rng& rng, long long samples, double eps = 1e-6);

double gumbel_mean(double chi);

// Background sequences of the three edge regimes.
enum class Regime {
  AsymptoticallyNeutral,  // uniform on [-alpha_n, 0], alpha_n = n - 1 + 2 lambda
  Nonneutral,             // gamma family, alpha_n = alpha_ratio * n
  FixedBackground,        // fixed rho, alpha_n = n - 1 + 2 lambda
};

std::string to_string(Regime regime);

struct RegimeSpec {
  Regime regime = Regime::FixedBackground;
  double beta = 1.0;
  double lambda = 1.0;
  double gamma = 2.0;
  double alpha_ratio = 2.0;
  std::vector<Knot> rho = {{-1.0, 1.0}, {0.0, 1.0}};
};

double regime_alpha(const RegimeSpec& spec, int n);
Background regime_background(const RegimeSpec& spec, int n);
// The edge limit of the regime (HalfWell for the fixed background).
LimitFamily regime_limit(const RegimeSpec& spec);

struct DistanceOptions {
  int limit_depth = 512;         // depth m for SquaredZero / SquaredGamma limits
  double halfwell_eps = 1e-8;
  double delta = 0.01;           // DKW level
  long long burn_in = 1000;
  long long thin = 10;
  LimitStrategy limit_strategy = LimitStrategy::Transfer;
  int grid_points = 40001;
};

struct DistanceRow {
  int n = 0;
  std::vector<double> ks;  // per coordinate j = 1..k
  std::string finite_method;
  double acceptance = 0.0;  // pilot acceptance of plain rejection
};

struct DistanceTable {
  RegimeSpec spec;
  int k = 1;
  long long samples = 0;
  double band = 0.0;  // two-sample DKW band at level delta
  std::string limit_method;
  std::vector<double> null_ks;  // limit sampler against an independent copy
  std::vector<DistanceRow> rows;
};

// Samples the finite-gas top k for each n and a limit population of the same
// size, returning per-coordinate KS distances.
DistanceTable finite_to_limit_distance(const RegimeSpec& spec, int k, const std::vector<int>& n_list,
                                       long long samples, Rng& rng, const DistanceOptions& options = {});

// Top-k populations of the finite gas: rejection when a pilot accepts at
// least 2e-3 of the attempts, Gibbs (one chain) otherwise. Column j holds
// x_(j+1).
struct FiniteTopK {
  std::vector<std::vector<double>> columns;
  std::string method;
  double acceptance = 0.0;
};
FiniteTopK sample_finite_topk(const Background& bg, const GasParams& params, int k, long long samples, Rng& rng,
                              long long burn_in = 1000, long long thin = 10);

}  // namespace jellium
