// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <cmath>
#include <vector>

#include "besselflow/rng.hpp"
#include "besselflow/special.hpp"
#include "besselflow/stats.hpp"

using namespace besselflow;
using namespace besselflow::stats;

TEST_CASE("uniform draws pass a one-sample test against their cdf") {
  PathRng rng(42, 0);
  std::vector<double> u(5000);
  for (auto& v : u) v = rng.uniform();
  auto rep = ks_one_sample(u, [](double x) {
    return std::min(1.0, std::max(0.0, x));
  });
  CHECK(rep.passed);
  CHECK(*rep.p_value > 0.01);
}

TEST_CASE("separated laws are rejected decisively") {
  PathRng rng(7, 0);
  std::vector<double> g(10000);
  for (auto& v : g) v = rng.gaussian();
  auto rep = ks_one_sample(g, [](double x) { return normal_cdf(x - 0.5); });
  CHECK_FALSE(rep.passed);
  CHECK(*rep.p_value < 1e-6);
}

TEST_CASE("small samples are rejected") {
  std::vector<double> tiny(10, 0.5);
  CHECK_THROWS(ks_one_sample(tiny, [](double) { return 0.5; }));
  CHECK_THROWS(ks_statistic_two_sample(tiny, tiny));
}

TEST_CASE("two-sample statistic matches a brute-force evaluation") {
  PathRng rng(3, 0);
  std::vector<double> a(80), b(60);
  for (auto& v : a) v = rng.gaussian();
  for (auto& v : b) v = rng.gaussian() + 0.3;
  const double d = ks_statistic_two_sample(a, b);
  double brute = 0.0;
  for (double t : a) {
    double fa = 0.0, fb = 0.0;
    for (double v : a)
      if (v <= t) fa += 1.0;
    for (double v : b)
      if (v <= t) fb += 1.0;
    brute = std::max(brute, std::fabs(fa / 80.0 - fb / 60.0));
  }
  for (double t : b) {
    double fa = 0.0, fb = 0.0;
    for (double v : a)
      if (v <= t) fa += 1.0;
    for (double v : b)
      if (v <= t) fb += 1.0;
    brute = std::max(brute, std::fabs(fa / 80.0 - fb / 60.0));
  }
  CHECK(d == doctest::Approx(brute).epsilon(1e-12));
}

TEST_CASE("null rejection rate is calibrated at the 1% level") {
  int reject_two = 0, reject_one = 0;
  const int reps = 200;
  for (int r = 0; r < reps; ++r) {
    PathRng rng(1000 + r, 0);
    std::vector<double> a(500), b(500);
    for (auto& v : a) v = rng.gaussian();
    for (auto& v : b) v = rng.gaussian();
    if (!ks_two_sample(a, b).passed) ++reject_two;
    if (!ks_one_sample(a, [](double x) { return normal_cdf(x); }).passed)
      ++reject_one;
  }
  CHECK(reject_two <= 6);  // <= 3% at nominal 1%
  CHECK(reject_one <= 6);
}

TEST_CASE("slope fit recovers exact and noisy lines") {
  std::vector<double> xs = {0.0, 1.0, 2.0, 3.0, 4.0};
  std::vector<double> ys(5);
  for (std::size_t i = 0; i < 5; ++i) ys[i] = 2.0 * xs[i] + 1.0;
  auto fit = slope_fit(xs, ys);
  CHECK(fit.slope == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(fit.intercept == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit.stderr_slope < 1e-10);

  PathRng rng(5, 0);
  for (std::size_t i = 0; i < 5; ++i)
    ys[i] = 2.0 * xs[i] + 1e-3 * rng.gaussian();
  fit = slope_fit(xs, ys);
  CHECK(std::fabs(fit.slope - 2.0) < 3.0 * fit.stderr_slope + 1e-9);
}

TEST_CASE("slope fit rejects degenerate input") {
  CHECK_THROWS(slope_fit({1.0, 2.0}, {1.0, 2.0}));
  CHECK_THROWS(slope_fit({1.0, 1.0, 1.0}, {1.0, 2.0, 3.0}));
}

TEST_CASE("moment estimate on constants and exponentials") {
  std::vector<double> c(100, 2.0);
  auto rep = moment_estimate(c, 0.5, 99);
  CHECK(rep.statistic == doctest::Approx(std::sqrt(2.0)));
  CHECK(rep.ci->first == doctest::Approx(rep.ci->second));

  PathRng rng(11, 0);
  std::vector<double> e(20000);
  for (auto& v : e) v = rng.exponential();
  rep = moment_estimate(e, 1.0, 100);
  CHECK(rep.ci->first <= 1.0);
  CHECK(1.0 <= rep.ci->second);
}

TEST_CASE("band warning is attached at the admissible edge") {
  std::vector<double> s(100, 1.0);
  auto rep = moment_estimate(s, 2.0, 1, 2.0);
  CHECK(rep.flags.size() == 1);
  rep = moment_estimate(s, 1.0, 1, 2.0);
  CHECK(rep.flags.empty());
}

TEST_CASE("parallel map is independent of the worker count") {
  const std::size_t n = 1000;
  std::vector<double> a(n), b(n), c(n);
  auto fill = [](std::vector<double>& out) {
    return [&out](std::size_t i) {
      PathRng rng(7, i);
      out[i] = rng.gaussian();
    };
  };
  parallel_for(n, 1, fill(a));
  parallel_for(n, 3, fill(b));
  parallel_for(n, 7, fill(c));
  CHECK(a == b);
  CHECK(a == c);
}

TEST_CASE("parallel map propagates exceptions") {
  CHECK_THROWS(parallel_for(100, 3, [](std::size_t i) {
    if (i == 57) throw std::runtime_error("boom");
  }));
}
