#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "jellium/error.hpp"
#include "jellium/finite_gas.hpp"
#include "jellium/stats.hpp"
#include "oracles.hpp"

using namespace jellium;

namespace {

// Pair sum written out directly, with the background term from the uniform
// closed form of the oracle header.
double pairwise_oracle(const std::vector<double>& x, double alpha) {
  double e = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) e -= 0.5 * std::abs(x[i] - x[j]);
    e += alpha * oracle::uniform_minus_potential(-1, 0, x[i]);
  }
  return e;
}

std::vector<double> top(const std::vector<Configuration>& cs, std::size_t k) {
  std::vector<double> out;
  for (const auto& c : cs) out.push_back(c.positions[k]);
  return out;
}

double normal_pdf(double x, double m, double s) {
  return std::exp(-0.5 * (x - m) * (x - m) / (s * s));
}

}  // namespace

TEST_CASE("energy examples") {
  const Background bg = Background::uniform(-1, 0, 2);
  const GasParams p{2, 1.0, 2.0};
  const std::vector<double> x{0.5, -0.5};
  CHECK(energy_pairwise(x, bg, p) == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(energy_ordered(x, bg, p) == doctest::Approx(0.75).epsilon(1e-14));

  const Background bg1 = Background::uniform(-1, 0, 1.5);
  const std::vector<double> zero{0.0};
  CHECK(energy_pairwise(zero, bg1, {1, 1.0, 1.5}) == doctest::Approx(1.5 * 0.25));

  const Background bg3 = Background::uniform(-1, 0, 3);
  const std::vector<double> same{0.2, 0.2, 0.2};
  CHECK(energy_pairwise(same, bg3, {3, 1.0, 3.0}) == doctest::Approx(3 * 3 * oracle::uniform_minus_potential(-1, 0, 0.2)));
  CHECK(energy_ordered(same, bg3, {3, 1.0, 3.0}) == energy_pairwise(same, bg3, {3, 1.0, 3.0}));

  // Two points, interaction only: -|1 - 0| = (-1) * 1 + 1 * 0.
  const std::vector<double> two{1.0, 0.0};
  const double background_part = 2 * (bg.minus_potential(1.0) + bg.minus_potential(0.0)) / 2;
  CHECK(energy_ordered(two, bg, p) - background_part == doctest::Approx(-0.5));
}

TEST_CASE("energy errors") {
  const Background bg = Background::uniform(-1, 0, 2);
  const std::vector<double> unsorted{-1.0, 1.0};
  CHECK_THROWS_AS(energy_ordered(unsorted, bg, {2, 1.0, 2.0}), UnsortedInput);
  const Background low = Background::uniform(-1, 0, 1);
  CHECK_THROWS_AS(energy_pairwise(unsorted, low, {2, 1.0, 1.0}), InadmissibleGas);
  CHECK_THROWS_AS(energy_pairwise(unsorted, bg, {2, 1.0, 3.0}), InvalidBackground);
  const Background bg3 = Background::uniform(-1, 0, 3);
  CHECK_THROWS_AS(energy_pairwise(unsorted, bg3, {3, 1.0, 3.0}), IndexOutOfRange);
}

TEST_CASE("ordered energy identity and exchangeability on random vectors") {
  Rng rng(21);
  int checked = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const int n = 1 + static_cast<int>(rng.uniform() * 12);
    const double alpha = n - 1 + 0.5 + 3 * rng.uniform();
    const Background bg = Background::uniform(-1, 0, alpha);
    const GasParams p{n, 1.0, alpha};
    std::vector<double> x(static_cast<std::size_t>(n));
    for (auto& v : x) v = 4 * rng.uniform() - 2.5;
    const double pair = energy_pairwise(x, bg, p);
    CHECK(pair == doctest::Approx(pairwise_oracle(x, alpha)).epsilon(1e-12));
    auto shuffled = x;
    std::reverse(shuffled.begin(), shuffled.end());
    CHECK(energy_pairwise(shuffled, bg, p) == doctest::Approx(pair).epsilon(1e-13));
    std::sort(x.begin(), x.end(), std::greater<>());
    const double ordered = energy_ordered(x, bg, p);
    CHECK(std::abs(ordered - pair) <= 1e-9 * std::max(1.0, std::abs(pair)));
    ++checked;
  }
  CHECK(checked == 10000);
}

TEST_CASE("count right of zero") {
  CHECK(count_right_of_zero(std::vector<double>{1, 0.5, -1}) == 2);
  CHECK(count_right_of_zero(std::vector<double>{-1, -2}) == 0);
  CHECK(count_right_of_zero(std::vector<double>{0.0, -1}) == 0);
}

TEST_CASE("independent draws match quadrature moments") {
  const Background bg = Background::uniform(-1, 0, 1);
  const FiniteGas gas(bg, {1, 1.0, 1.0});
  const auto w = [](double x) { return std::exp(-oracle::uniform_minus_potential(-1, 0, x)); };
  const auto m = oracle::moments(w, {-80, -1, 0, 80});
  Rng rng(22);
  const int n = 1000000;
  std::vector<double> xs(n);
  for (auto& x : xs) x = gas.sample_independent(1, rng);
  const MeanError me = mean_with_error(xs);
  CHECK(std::abs(me.mean - m.mean) < 3 * std::sqrt(m.variance / n));

  SUBCASE("symmetric background, middle particle") {
    const Background b3 = Background::uniform(-1, 0, 3);
    const FiniteGas g3(b3, {3, 1.0, 3.0});
    std::vector<double> ys(200000);
    for (auto& y : ys) y = g3.sample_independent(2, rng);
    const MeanError e = mean_with_error(ys);
    CHECK(std::abs(e.mean + 0.5) < 3 * e.std_error);
  }
}

TEST_CASE("inside the uniform background each law is gaussian") {
  // Mean (a+b)/2 + (b-a)(n+1-2i)/(2 alpha), variance (b-a)/(alpha beta),
  // checked by draws of Y_i that land in [a, b].
  const double a = -1, b = 0, alpha = 2, beta = 4;
  const int n = 2;
  const FiniteGas gas(Background::uniform(a, b, alpha), {n, beta, alpha});
  Rng rng(23);
  for (int i = 1; i <= n; ++i) {
    const double mu = 0.5 * (a + b) + (b - a) * (n + 1 - 2 * i) / (2 * alpha);
    const double sd = std::sqrt((b - a) / (alpha * beta));
    const auto m = oracle::moments([&](double x) { return normal_pdf(x, mu, sd); }, {a, b});
    std::vector<double> kept;
    while (kept.size() < 100000) {
      const double y = gas.sample_independent(i, rng);
      if (y >= a && y <= b) kept.push_back(y);
    }
    const MeanError e = mean_with_error(kept);
    CHECK(std::abs(e.mean - m.mean) < 4 * e.std_error);
    CHECK(std::abs(e.variance - m.variance) < 4 * m.variance * std::sqrt(2.0 / kept.size()));
  }
}

TEST_CASE("rejection sampler") {
  Rng rng(24);
  SUBCASE("one particle is always accepted") {
    const FiniteGas gas(Background::uniform(-1, 0, 1), {1, 1.0, 1.0});
    const RejectionDraw d = sample_gas_rejection(gas, rng);
    CHECK(d.acceptance_rate == 1.0);
    CHECK(d.attempts == 1);
    CHECK(d.config.energy == doctest::Approx(energy_pairwise(d.config.positions, gas.background(), gas.params())));
  }
  SUBCASE("well separated means at large beta") {
    const FiniteGas gas(Background::uniform(-1, 0, 5), {5, 50.0, 5.0});
    long long attempts = 0;
    for (int s = 0; s < 2000; ++s) attempts += sample_gas_rejection(gas, rng).attempts;
    const double rate = 2000.0 / static_cast<double>(attempts);
    MESSAGE("acceptance at n=5, beta=50: " << rate);
    CHECK(rate >= 0.5);
  }
  SUBCASE("matches gibbs at n=2, beta=8") {
    const FiniteGas gas(Background::uniform(-1, 0, 2), {2, 8.0, 2.0});
    std::vector<Configuration> rej;
    long long attempts = 0;
    for (int s = 0; s < 100000; ++s) {
      RejectionDraw d = sample_gas_rejection(gas, rng);
      attempts += d.attempts;
      rej.push_back(std::move(d.config));
    }
    const double rate = 100000.0 / static_cast<double>(attempts);
    CHECK(rate > 0.0);
    CHECK(rate < 1.0);
    GibbsOptions o;
    o.sweeps = 1000 + 100000 * 5;
    o.thin = 5;
    const auto gib = sample_gas_gibbs(gas, rng, o);
    CHECK(gib.size() == 100000);
    const double band = dkw_band(100000, 100000, 0.01);
    for (std::size_t k = 0; k < 2; ++k) {
      CHECK(ks_statistic(EmpiricalDistribution(top(rej, k)), EmpiricalDistribution(top(gib, k))) < band);
    }
  }
}

TEST_CASE("gibbs sampler") {
  Rng rng(25);
  SUBCASE("n = 1 reduces to independent draws") {
    const FiniteGas gas(Background::uniform(-1, 0, 1), {1, 1.0, 1.0});
    GibbsOptions o;
    o.sweeps = 1000 + 50000;
    o.thin = 1;
    const auto gib = sample_gas_gibbs(gas, rng, o);
    std::vector<double> ind(50000);
    for (auto& x : ind) x = gas.sample_independent(1, rng);
    CHECK(ks_statistic(EmpiricalDistribution(top(gib, 0)), EmpiricalDistribution(ind)) < dkw_band(50000, 50000, 0.01));
  }
  SUBCASE("n = 3 matches rejection; dispersed chains mix") {
    const FiniteGas gas(Background::uniform(-1, 0, 3), {3, 1.0, 3.0});
    std::vector<Configuration> rej;
    for (int s = 0; s < 100000; ++s) rej.push_back(sample_gas_rejection(gas, rng).config);
    GibbsOptions o;
    o.sweeps = 1000 + 100000 * 3;
    o.thin = 3;
    const auto gib = sample_gas_gibbs(gas, rng, o);
    CHECK(ks_statistic(EmpiricalDistribution(top(rej, 0)), EmpiricalDistribution(top(gib, 0))) <
          dkw_band(100000, 100000, 0.01));

    GibbsOptions hi = o;
    hi.sweeps = 1000 + 5000;
    hi.thin = 1;
    hi.initial = {20, 19, 18};
    GibbsOptions lo = hi;
    lo.initial = {-18, -19, -20};
    const double r = gelman_rubin({top(sample_gas_gibbs(gas, rng, hi), 0), top(sample_gas_gibbs(gas, rng, lo), 0)});
    CHECK(r < 1.05);
  }
  SUBCASE("option checks") {
    const FiniteGas gas(Background::uniform(-1, 0, 1), {1, 1.0, 1.0});
    GibbsOptions o;
    o.thin = 0;
    CHECK_THROWS_AS(sample_gas_gibbs(gas, rng, o), IndexOutOfRange);
    o.thin = 1;
    o.sweeps = o.burn_in;
    CHECK_THROWS_AS(sample_gas_gibbs(gas, rng, o), IndexOutOfRange);
  }
}

TEST_CASE("conditional gaussian representation") {
  Rng rng(26);
  SUBCASE("n = 1 is a truncated gaussian") {
    const GasParams p{1, 1.0, 2.0};
    const auto m = oracle::moments([](double x) { return normal_pdf(x, -0.5, std::sqrt(0.5)); }, {-1, 0});
    std::vector<double> xs;
    for (int s = 0; s < 100000; ++s) xs.push_back(sample_gas_gaussian_conditional(-1, 0, p, rng).config.positions[0]);
    const MeanError e = mean_with_error(xs);
    CHECK(std::abs(e.mean - m.mean) < 4 * e.std_error);
    CHECK(std::abs(e.variance - m.variance) < 4 * m.variance * std::sqrt(2.0 / 100000));
  }
  SUBCASE("n = 2 matches the general sampler restricted to [a, b]") {
    const GasParams p{2, 2.0, 3.0};
    const FiniteGas gas(Background::uniform(-1, 0, 3), p);
    std::vector<double> direct;
    std::vector<double> gauss;
    while (direct.size() < 50000) {
      const auto c = sample_gas_rejection(gas, rng).config;
      if (c.positions.front() <= 0 && c.positions.back() >= -1) direct.push_back(c.positions[0]);
    }
    for (int s = 0; s < 50000; ++s) gauss.push_back(sample_gas_gaussian_conditional(-1, 0, p, rng).config.positions[0]);
    CHECK(ks_statistic(EmpiricalDistribution(direct), EmpiricalDistribution(gauss)) < dkw_band(50000, 50000, 0.01));
  }
  SUBCASE("scaling beta by sigma and positions by 1/sigma leaves the law unchanged") {
    const double sigma = 3.0;
    std::vector<double> base;
    std::vector<double> scaled;
    for (int s = 0; s < 50000; ++s) {
      base.push_back(sample_gas_gaussian_conditional(-1, 0, {2, 1.0, 3.0}, rng).config.positions[0]);
      scaled.push_back(sigma * sample_gas_gaussian_conditional(-1 / sigma, 0, {2, sigma, 3.0}, rng).config.positions[0]);
    }
    CHECK(ks_statistic(EmpiricalDistribution(base), EmpiricalDistribution(scaled)) < dkw_band(50000, 50000, 0.01));
  }
  CHECK_THROWS_AS(sample_gas_gaussian_conditional(-1, 0, {3, 1.0, 2.0}, rng), InadmissibleGas);
}

TEST_CASE("scale invariance of the full gas") {
  // sigma X under (alpha, beta, rho) has the law of X under (alpha, beta/sigma, dil_sigma rho).
  Rng rng(27);
  for (double sigma : {0.5, 3.0}) {
    const Background bg = Background::uniform(-1, 0, 3.2);
    const FiniteGas a(bg, {3, 1.5, 3.2});
    const FiniteGas b(bg.dilated(sigma), {3, 1.5 / sigma, 3.2});
    std::vector<double> xa;
    std::vector<double> xb;
    for (int s = 0; s < 30000; ++s) {
      xa.push_back(sigma * sample_gas_rejection(a, rng).config.positions[0]);
      xb.push_back(sample_gas_rejection(b, rng).config.positions[0]);
    }
    CHECK(ks_statistic(EmpiricalDistribution(xa), EmpiricalDistribution(xb)) < dkw_band(30000, 30000, 0.01));
  }
}

TEST_CASE("log partition function") {
  Rng rng(28);
  SUBCASE("one particle is exact") {
    const FiniteGas gas(Background::uniform(-1, 0, 1), {1, 1.0, 1.0});
    // Affine tails e^{-|x + 1/2|/2} integrate to 2 e^{-1/4} on each side.
    const double z = 4 * std::exp(-0.25) +
                     oracle::integrate([](double x) { return std::exp(-oracle::uniform_minus_potential(-1, 0, x)); }, -1, 0);
    const PartitionEstimate e = estimate_log_partition(gas, rng, 1000);
    CHECK(e.log_z == doctest::Approx(std::log(z)).epsilon(1e-7));
    CHECK(e.std_error == 0.0);
  }
  SUBCASE("two particles against the split-plane oracle") {
    const FiniteGas gas(Background::uniform(-1, 0, 3), {2, 1.0, 3.0});
    const PartitionEstimate e = estimate_log_partition(gas, rng, 200000);
    CHECK(std::abs(e.log_z - std::log(oracle::z2_uniform(3.0, 1.0))) < 3 * e.std_error);
    CHECK(e.order_probability > 0);
    CHECK(e.ordered <= e.attempts);
  }
  SUBCASE("inadmissible charge") {
    CHECK_THROWS_AS(FiniteGas(Background::uniform(-1, 0, 1), {2, 1.0, 1.0}), InadmissibleGas);
  }
}
