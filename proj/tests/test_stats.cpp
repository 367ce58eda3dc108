#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "jellium/error.hpp"
#include "jellium/rng.hpp"
#include "jellium/stats.hpp"
#include "oracles.hpp"

using namespace jellium;

namespace {

std::vector<double> exponentials(Rng& rng, std::size_t n, double rate, double shift = 0.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = shift + rng.exponential() / rate;
  return v;
}

std::vector<double> uniforms(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform();
  return v;
}

}  // namespace

TEST_CASE("empirical distribution queries") {
  const EmpiricalDistribution e({3.0, 1.0, 2.0, 2.0});
  CHECK(e.count() == 4);
  CHECK(e.samples().front() == 1.0);
  CHECK(e.cdf(0.5) == 0.0);
  CHECK(e.cdf(2.0) == 0.75);  // right-continuous
  CHECK(e.cdf(3.0) == 1.0);
  CHECK(e.survival(1.0) == 0.75);
  CHECK(e.quantile(0.25) == 1.0);
  CHECK(e.quantile(0.26) == 2.0);
  CHECK(e.quantile(1.0) == 3.0);
  CHECK(e.mean() == doctest::Approx(2.0));
  CHECK(e.variance() == doctest::Approx(2.0 / 3.0));
  CHECK_THROWS_AS(EmpiricalDistribution({}), IndexOutOfRange);
}

TEST_CASE("ks statistic examples") {
  const EmpiricalDistribution a({0.1, 0.7, 0.3});
  CHECK(ks_statistic(a, a) == 0.0);
  CHECK(ks_statistic(EmpiricalDistribution({0.0}), EmpiricalDistribution({1.0})) == 1.0);
}

TEST_CASE("ks statistic matches a brute-force evaluation, ties included") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> a(37 + trial);
    std::vector<double> b(53 - trial);
    // Rounded values force ties within and across samples.
    for (auto& x : a) x = std::round(rng.uniform() * 20) / 20;
    for (auto& x : b) x = std::round((rng.uniform() * 1.1 - 0.05) * 20) / 20;
    CHECK(ks_statistic(EmpiricalDistribution(a), EmpiricalDistribution(b)) ==
          doctest::Approx(oracle::ks_brute(a, b)).epsilon(1e-12));
  }
}

TEST_CASE("one-sample ks against the exact cdf") {
  Rng rng(8);
  const EmpiricalDistribution e(uniforms(rng, 20000));
  const double d = ks_statistic(e, [](double x) { return std::clamp(x, 0.0, 1.0); });
  CHECK(d < dkw_band(20000, 0.01));
  // A single point at 0.5 against U(0,1): the ECDF jumps 0 -> 1 where F = 1/2.
  CHECK(ks_statistic(EmpiricalDistribution({0.5}), [](double x) { return x; }) == doctest::Approx(0.5));
}

TEST_CASE("two independent half-well-like populations stay inside the band") {
  Rng rng(9);
  const EmpiricalDistribution a(exponentials(rng, 100000, 2.0));
  const EmpiricalDistribution b(exponentials(rng, 100000, 2.0));
  CHECK(ks_statistic(a, b) < dkw_band(100000, 100000, 0.01));
}

TEST_CASE("dkw band values") {
  CHECK(dkw_band(20000, 0.01) == doctest::Approx(std::sqrt(std::log(200.0) / 40000.0)).epsilon(1e-14));
  CHECK(dkw_band(20000, 0.01) == doctest::Approx(0.01151).epsilon(1e-3));
  CHECK(dkw_band(80000, 0.01) == doctest::Approx(dkw_band(20000, 0.01) / 2).epsilon(1e-14));
  CHECK(dkw_band(100, 1.0) == doctest::Approx(std::sqrt(std::log(2.0) / 200.0)));
  CHECK(dkw_band(100, 200, 0.05) == doctest::Approx(dkw_band(100, 0.05) + dkw_band(200, 0.05)));
  CHECK_THROWS_AS(dkw_band(0, 0.1), IndexOutOfRange);
  CHECK_THROWS_AS(dkw_band(10, 0.0), IndexOutOfRange);
}

TEST_CASE("dkw soundness over repeated draws") {
  Rng rng(11);
  const double band = dkw_band(10000, 0.01);
  int inside = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const EmpiricalDistribution e(uniforms(rng, 10000));
    inside += ks_statistic(e, [](double x) { return std::clamp(x, 0.0, 1.0); }) <= band;
  }
  CHECK(inside >= 195);
}

TEST_CASE("dominance verdicts") {
  Rng rng(12);
  const auto base = exponentials(rng, 20000, 1.0);
  std::vector<double> shifted = exponentials(rng, 20000, 1.0, 1.0);
  const EmpiricalDistribution p(shifted);
  const EmpiricalDistribution q(base);
  CHECK(dominance_check(p, q, 0.01).verdict == Dominance::Dominates);
  CHECK(dominance_check(q, p, 0.01).verdict == Dominance::Dominated);
  const EmpiricalDistribution same(exponentials(rng, 20000, 1.0));
  CHECK(dominance_check(same, q, 0.01).verdict == Dominance::Inconclusive);

  // A narrow and a wide law with the same center cross.
  std::vector<double> narrow(20000);
  std::vector<double> wide(20000);
  for (auto& x : narrow) x = 0.1 * standard_normal(rng);
  for (auto& x : wide) x = 3.0 * standard_normal(rng);
  const auto r = dominance_check(EmpiricalDistribution(narrow), EmpiricalDistribution(wide), 0.01);
  CHECK(r.verdict == Dominance::Crossing);
  CHECK(r.band == doctest::Approx(dkw_band(20000, 20000, 0.01)));
  CHECK(to_string(Dominance::Crossing) == "Crossing");
}

TEST_CASE("dominance calibration on equal laws") {
  Rng rng(13);
  int inconclusive = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const EmpiricalDistribution a(exponentials(rng, 2000, 1.0));
    const EmpiricalDistribution b(exponentials(rng, 2000, 1.0));
    inconclusive += dominance_check(a, b, 0.01).verdict == Dominance::Inconclusive;
  }
  CHECK(inconclusive >= 95);
}

TEST_CASE("tail fit on exact exponential tails") {
  Rng rng(14);
  const double beta = 2.0;
  const double lambda = 1.5;
  const EmpiricalDistribution e(exponentials(rng, 1000000, beta * lambda));
  const TailFit fit = tail_exponent_fit(e, 1.0);
  CHECK(std::abs(fit.coefficient / (beta * lambda) - 1) < 0.1);
  CHECK(fit.r_squared > 0.99);
  CHECK(fit.t_lo < fit.t_hi);
  CHECK(fit.profile.size() == 200);
  // -log S(t) = 3 t exactly, so c_t hovers near 0 and the intercept near 0.
  const auto c = fit.correction(beta * lambda);
  CHECK(std::abs(c.front()) < 0.05);
  CHECK(std::abs(fit.intercept) < 0.1);

  SUBCASE("stable under doubling the count and shifting the window") {
    const EmpiricalDistribution twice(exponentials(rng, 2000000, beta * lambda));
    const TailFit f2 = tail_exponent_fit(twice, 1.0);
    const TailFit f3 = tail_exponent_fit(twice, 1.0, TailWindow{1e-3, 1e-0});
    CHECK(std::abs(f2.coefficient / fit.coefficient - 1) < 0.1);
    CHECK(std::abs(f3.coefficient / fit.coefficient - 1) < 0.1);
  }
}

TEST_CASE("tail fit for a t^gamma law") {
  // Survival exp(-(2/3) t^{3/2}) for t >= 0, sampled by inversion.
  Rng rng(15);
  std::vector<double> v(500000);
  for (auto& x : v) x = std::pow(1.5 * rng.exponential(), 2.0 / 3.0);
  const TailFit fit = tail_exponent_fit(EmpiricalDistribution(v), 1.5, TailWindow{1e-3, 1e-1});
  CHECK(fit.coefficient == doctest::Approx(2.0 / 3.0).epsilon(0.05));
}

TEST_CASE("tail fit errors") {
  const EmpiricalDistribution small(std::vector<double>(1000, 1.0));
  CHECK_THROWS_AS(tail_exponent_fit(small, 1.0), WindowTooDeep);
  CHECK_THROWS_AS(tail_exponent_fit(small, 1.0, TailWindow{0.2, 0.1}), IndexOutOfRange);
  CHECK_THROWS_AS(tail_exponent_fit(small, 0.0, TailWindow{0.1, 0.5}), IndexOutOfRange);
}

TEST_CASE("gelman-rubin and moments") {
  Rng rng(16);
  std::vector<std::vector<double>> same(4, std::vector<double>(5000));
  for (auto& c : same) {
    for (auto& x : c) x = standard_normal(rng);
  }
  CHECK(gelman_rubin(same) < 1.01);
  auto apart = same;
  for (auto& x : apart[0]) x += 5.0;
  CHECK(gelman_rubin(apart) > 1.5);
  CHECK_THROWS_AS(gelman_rubin({same[0]}), IndexOutOfRange);

  const std::vector<double> v{1, 2, 3, 4};
  const MeanError me = mean_with_error(v);
  CHECK(me.mean == doctest::Approx(2.5));
  CHECK(me.variance == doctest::Approx(5.0 / 3.0));
  CHECK(me.std_error == doctest::Approx(std::sqrt(5.0 / 12.0)));

  const std::vector<double> w{2, 4, 6, 8};
  const std::vector<double> z{8, 6, 4, 2};
  CHECK(correlation(v, w) == doctest::Approx(1.0));
  CHECK(correlation(v, z) == doctest::Approx(-1.0));
}
