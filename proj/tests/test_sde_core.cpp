// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "besselflow/adaptive.hpp"
#include "besselflow/bessel.hpp"
#include "besselflow/flow_calculus.hpp"
#include "besselflow/laws.hpp"
#include "besselflow/stats.hpp"

using namespace besselflow;

TEST_CASE("empty grids are rejected") {
  CHECK_THROWS(TimeGrid(0.0, 1.0, 0));
  CHECK_THROWS(TimeGrid(1.0, 1.0, 16));
}

TEST_CASE("noise is reproducible and matches its law at scale") {
  TimeGrid grid(0.0, 100.0, 100000);  // dt = 1e-3
  NoisePath a = generate_noise(grid, 42, 3);
  NoisePath b = generate_noise(grid, 42, 3);
  CHECK(a.increments == b.increments);

  double sum = 0.0, sum2 = 0.0;
  for (double db : a.increments) {
    sum += db;
    sum2 += db * db;
  }
  const double n = static_cast<double>(a.increments.size());
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  CHECK(std::fabs(mean) < 4.0 * std::sqrt(grid.dt() / n));
  CHECK(var == doctest::Approx(grid.dt()).epsilon(0.05));
}

TEST_CASE("one euler step realizes the drift definition") {
  TimeGrid grid(0.0, 0.01, 1);
  NoisePath noise;
  noise.grid = grid;
  noise.increments = {0.0};
  BesselPath path = simulate_bessel(1.0, 2.0, noise);
  // drift (delta-1)/2 * dt / rho = 0.5 * 0.01
  CHECK(path.values[1] == doctest::Approx(1.0 + 0.5 * 0.01 / 1.0));
}

TEST_CASE("implicit scheme stays positive through the singularity") {
  TimeGrid grid(0.0, 1.0, 4096);
  NoisePath noise = generate_noise(grid, 7, 0);
  BesselPath path = simulate_bessel(0.01, 1.5, noise, Scheme::implicit_drift,
                                    Mode::free_running);
  for (double v : path.values) CHECK(v > 0.0);
}

TEST_CASE("preconditions on delta and x0") {
  TimeGrid grid(0.0, 1.0, 16);
  NoisePath noise = generate_noise(grid, 1, 0);
  CHECK_THROWS(simulate_bessel(1.0, 1.0, noise));
  CHECK_THROWS(simulate_bessel(-0.5, 2.0, noise));
}

TEST_CASE("terminal marginal agrees with the exact BESQ transition") {
  const double delta = 3.0;
  const std::size_t n = 10000;
  TimeGrid grid(0.0, 1.0, 2048);
  std::vector<double> sim(n), exact(n);
  for (std::size_t i = 0; i < n; ++i) {
    NoisePath noise = generate_noise(grid, 20240201, i);
    sim[i] = simulate_bessel(1.0, delta, noise).terminal();
    PathRng rng(911, i);
    exact[i] = std::sqrt(sample_besq(1.0, delta, 1.0, rng));
  }
  auto rep = stats::ks_two_sample(sim, exact);
  CHECK(rep.passed);
}

TEST_CASE("squared scheme output matches besq draws at fractional dimension") {
  const double delta = 2.5;
  const std::size_t n = 10000;
  TimeGrid grid(0.0, 1.0, 2048);
  std::vector<double> sim(n), exact(n);
  for (std::size_t i = 0; i < n; ++i) {
    NoisePath noise = generate_noise(grid, 5150, i);
    const double v = simulate_bessel(1.0, delta, noise).terminal();
    sim[i] = v * v;
    PathRng rng(5151, i);
    exact[i] = sample_besq(1.0, delta, 1.0, rng);
  }
  auto rep = stats::ks_two_sample(sim, exact);
  CHECK(rep.passed);
}

TEST_CASE("besq degenerate and zero-start cases") {
  PathRng rng(1, 0);
  CHECK(sample_besq(4.0, 3.0, 0.0, rng) == 4.0);
  double mean = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) mean += sample_besq(0.0, 2.0, 1.0, rng);
  mean /= n;
  CHECK(mean == doctest::Approx(2.0).epsilon(0.02));  // E X_t = x^2 + delta t
}

TEST_CASE("stopped-mode absorption frequency matches the tau0 law") {
  const double delta = 1.5, x0 = 0.1;
  const double expect = laws::tau0_cdf(x0, delta, 1.0);

  // grid monitoring misses sub-step excursions, an O(sqrt(dt)) deficit;
  // pin its magnitude on a uniform grid and the mechanics of freezing
  {
    const std::size_t n = 1500;
    TimeGrid grid(0.0, 1.0, 1 << 14);
    std::size_t absorbed = 0;
    for (std::size_t i = 0; i < n; ++i) {
      NoisePath noise = generate_noise(grid, 777, i);
      BesselPath path = simulate_bessel(x0, delta, noise, Scheme::euler_floor,
                                        Mode::stopped_at_zero);
      if (path.absorbed_at) {
        ++absorbed;
        CHECK(*path.absorption_time <= 1.0);
        CHECK(path.values[*path.absorbed_at] == 0.0);
        CHECK(path.values.back() == 0.0);
      }
    }
    const double frac = static_cast<double>(absorbed) / static_cast<double>(n);
    CHECK(frac < expect);  // detection can only lag
    CHECK(std::fabs(frac - expect) < 0.07);
  }

  // the adaptive stepper resolves the crossing scale and meets the law
  {
    const std::size_t n = 6000;
    AdaptiveOpts opts;
    opts.eta = 1.0 / 32.0;
    opts.stop_value = 1e-8 * x0;
    opts.max_steps = 1L << 16;
    std::size_t absorbed = 0;
    for (std::size_t i = 0; i < n; ++i) {
      PathRng rng(778, i);
      auto res =
          adaptive_bessel_run(x0, delta, rng, 1.0, Mode::stopped_at_zero,
                              opts, [](double, double, double, double) {});
      if (res.absorbed && res.t <= 1.0) ++absorbed;
    }
    const double frac = static_cast<double>(absorbed) / static_cast<double>(n);
    CHECK(std::fabs(frac - expect) < 0.02);
  }
}

TEST_CASE("flow with equal initials is a single path twice") {
  TimeGrid grid(0.0, 1.0, 512);
  NoisePath noise = generate_noise(grid, 31, 0);
  FlowBundle bundle = simulate_flow({1.0, 1.0}, 2.5, noise);
  CHECK(bundle.paths[0].values == bundle.paths[1].values);
  CHECK(bundle.order_violations == 0);
}

TEST_CASE("flow ordering is enforced at every node") {
  TimeGrid grid(0.0, 1.0, 4096);
  for (std::uint64_t s = 0; s < 20; ++s) {
    NoisePath noise = generate_noise(grid, 1000 + s, 0);
    FlowBundle bundle = simulate_flow({0.5, 1.0}, 2.5, noise);
    for (std::size_t k = 0; k < bundle.node_count; ++k)
      CHECK(bundle.paths[0].values[k] <= bundle.paths[1].values[k]);
  }
}

TEST_CASE("flow rejects unsorted initials and x=0 below dimension 2") {
  TimeGrid grid(0.0, 1.0, 16);
  NoisePath noise = generate_noise(grid, 1, 0);
  CHECK_THROWS(simulate_flow({1.0, 0.5}, 2.5, noise));
  CHECK_THROWS(simulate_flow({0.0, 1.0}, 1.5, noise));
  CHECK_NOTHROW(simulate_flow({0.0, 1.0}, 2.5, noise));
}

TEST_CASE("order violations stay rare on fine grids") {
  TimeGrid grid(0.0, 1.0, 1 << 12);
  long violations = 0;
  long nodes = 0;
  for (std::uint64_t s = 0; s < 50; ++s) {
    NoisePath noise = generate_noise(grid, 60 + s, 0);
    FlowBundle bundle = simulate_flow({0.5, 0.75, 1.0}, 2.5, noise);
    violations += bundle.order_violations;
    nodes += static_cast<long>(bundle.node_count) * 3;
  }
  CHECK(static_cast<double>(violations) < 0.001 * static_cast<double>(nodes));
}

TEST_CASE("free mode keeps high-dimension paths away from the floor") {
  TimeGrid grid(0.0, 1.0, 1 << 14);
  long hits = 0;
  for (std::uint64_t s = 0; s < 30; ++s) {
    NoisePath noise = generate_noise(grid, 4242 + s, 0);
    BesselPath path = simulate_bessel(0.5, 2.0, noise);
    hits += path.floor_hits;
  }
  CHECK(static_cast<double>(hits) <
        0.001 * 30.0 * static_cast<double>(grid.n_nodes()));
}

TEST_CASE("coupled finite difference tracks the first derivative") {
  const double delta = 2.5, gap = 1e-3;
  TimeGrid grid(0.0, 1.0, 1 << 14);
  for (std::uint64_t s = 0; s < 10; ++s) {
    NoisePath noise = generate_noise(grid, 321 + s, 0);
    FlowBundle bundle = simulate_flow({1.0, 1.0 + gap}, delta, noise);
    const double fd =
        (bundle.paths[1].terminal() - bundle.paths[0].terminal()) / gap;
    const auto y = first_derivative(bundle.paths[0]);
    CHECK(std::fabs(fd / y.back() - 1.0) < 0.01);
  }
}

TEST_CASE("hitting time sentinels and boundary cases") {
  BesselPath path;
  path.grid = TimeGrid(0.0, 1.0, 4);
  path.values = {2.0, 2.1, 2.2, 2.1, 2.3};
  path.delta = 2.5;
  path.x0 = 2.0;
  CHECK_FALSE(hitting_time(path, 1.0).hit());
  CHECK(hitting_time(path, 1.0).time ==
        std::numeric_limits<double>::infinity());
  CHECK(hitting_time(path, 2.0).time == 0.0);  // starts at the level

  path.values = {2.0, 1.0, 0.5, 0.25, 0.2};
  const HittingTime ht = hitting_time(path, 0.75);
  // linear interpolation between nodes 1 (1.0) and 2 (0.5)
  CHECK(ht.time == doctest::Approx(0.25 + 0.25 * 0.5));
}

TEST_CASE("adaptive first zeros match the exact deciles") {
  const double delta = 1.5, x = 1.0;
  const std::size_t n = 20000;
  AdaptiveOpts opts;
  opts.eta = 1.0 / 32.0;
  opts.stop_value = 1e-8 * x;
  opts.max_steps = 1L << 16;
  std::vector<double> taus;
  taus.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    PathRng rng(20260501, i);
    auto res = adaptive_bessel_run(x, delta, rng,
                                   std::numeric_limits<double>::infinity(),
                                   Mode::stopped_at_zero, opts,
                                   [](double, double, double, double) {});
    if (res.absorbed) taus.push_back(res.t);
  }
  CHECK(taus.size() > 0.999 * n);
  std::sort(taus.begin(), taus.end());
  for (int k = 1; k <= 5; ++k) {
    const double sim = stats::quantile_sorted(taus, 0.1 * k);
    const double exact = laws::tau0_quantile(x, delta, 0.1 * k);
    CHECK(sim == doctest::Approx(exact).epsilon(0.075));
  }
}

TEST_CASE("bundles are bitwise deterministic") {
  TimeGrid grid(0.0, 1.0, 256);
  NoisePath n1 = generate_noise(grid, 5, 9);
  NoisePath n2 = generate_noise(grid, 5, 9);
  FlowBundle a = simulate_flow({0.5, 1.0}, 2.5, n1);
  FlowBundle b = simulate_flow({0.5, 1.0}, 2.5, n2);
  CHECK(a.paths[0].values == b.paths[0].values);
  CHECK(a.paths[1].values == b.paths[1].values);
}
