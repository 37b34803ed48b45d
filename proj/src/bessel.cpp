// SPDX-License-Identifier: Apache-2.0
#include "besselflow/bessel.hpp"

#include <algorithm>
#include <stdexcept>

namespace besselflow {

NoisePath generate_noise(const TimeGrid& grid, std::uint64_t seed,
                         std::uint64_t stream) {
  if (grid.n_steps == 0)
    throw std::invalid_argument("generate_noise: empty grid");
  NoisePath noise;
  noise.grid = grid;
  noise.increments.resize(grid.n_steps);
  PathRng rng(seed, stream);
  const double sdt = std::sqrt(grid.dt());
  for (double& db : noise.increments) db = sdt * rng.gaussian();
  return noise;
}

BesselPath simulate_bessel(double x0, double delta, const NoisePath& noise,
                           Scheme scheme, Mode mode) {
  if (!(delta > 1.0))
    throw std::invalid_argument("simulate_bessel: requires delta > 1");
  if (!(x0 >= 0.0))
    throw std::invalid_argument("simulate_bessel: requires x0 >= 0");
  if (noise.increments.size() != noise.grid.n_steps)
    throw std::invalid_argument("simulate_bessel: malformed noise path");

  BesselPath path;
  path.grid = noise.grid;
  path.delta = delta;
  path.x0 = x0;
  path.scheme = scheme;
  path.mode = mode;
  path.values.resize(noise.grid.n_nodes());
  path.values[0] = x0;

  const double dt = noise.grid.dt();
  BesselStepper stepper(x0, delta, scheme, mode);
  for (std::size_t k = 0; k < noise.grid.n_steps; ++k) {
    const bool was_absorbed = stepper.absorbed();
    path.values[k + 1] = stepper.step(noise.increments[k], dt);
    if (stepper.nonfinite())
      throw std::runtime_error(
          "simulate_bessel: non-finite value, step size too large for the "
          "drift");
    if (!was_absorbed && stepper.absorbed()) {
      path.absorbed_at = k + 1;
      path.absorption_time =
          noise.grid.node(k) + stepper.crossing_fraction() * dt;
    }
  }
  path.floor_hits = stepper.floor_hits();
  return path;
}

FlowBundle simulate_flow(const std::vector<double>& xs, double delta,
                         const NoisePath& noise, Scheme scheme, Mode mode) {
  if (!(delta > 1.0))
    throw std::invalid_argument("simulate_flow: requires delta > 1");
  if (xs.empty()) throw std::invalid_argument("simulate_flow: no initials");
  if (!std::is_sorted(xs.begin(), xs.end()))
    throw std::invalid_argument("simulate_flow: initials must be ascending");
  for (double x : xs) {
    if (x < 0.0 || (x == 0.0 && delta < 2.0))
      throw std::invalid_argument(
          "simulate_flow: initials must be > 0 (x = 0 allowed for delta >= "
          "2)");
  }

  FlowBundle bundle;
  bundle.xs = xs;
  bundle.delta = delta;
  bundle.node_count = noise.grid.n_nodes();

  const std::size_t m = xs.size();
  std::vector<BesselStepper> steppers;
  steppers.reserve(m);
  for (double x : xs) steppers.emplace_back(x, delta, scheme, mode);

  bundle.paths.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    bundle.paths[i].grid = noise.grid;
    bundle.paths[i].delta = delta;
    bundle.paths[i].x0 = xs[i];
    bundle.paths[i].scheme = scheme;
    bundle.paths[i].mode = mode;
    bundle.paths[i].values.assign(noise.grid.n_nodes(), 0.0);
    bundle.paths[i].values[0] = xs[i];
  }

  const double dt = noise.grid.dt();
  std::vector<double> cur(m);
  for (std::size_t k = 0; k < noise.grid.n_steps; ++k) {
    const double db = noise.increments[k];
    for (std::size_t i = 0; i < m; ++i) {
      const bool was_absorbed = steppers[i].absorbed();
      cur[i] = steppers[i].step(db, dt);
      if (steppers[i].nonfinite())
        throw std::runtime_error("simulate_flow: non-finite value");
      if (!was_absorbed && steppers[i].absorbed()) {
        bundle.paths[i].absorbed_at = k + 1;
        bundle.paths[i].absorption_time =
            noise.grid.node(k) + steppers[i].crossing_fraction() * dt;
      }
    }
    // comparison-theorem enforcement: running max with the lower path
    for (std::size_t i = 1; i < m; ++i) {
      if (cur[i] < cur[i - 1]) {
        ++bundle.order_violations;
        if (!steppers[i].absorbed()) {
          cur[i] = cur[i - 1];
          steppers[i].set_value(cur[i]);
        }
      }
    }
    for (std::size_t i = 0; i < m; ++i) bundle.paths[i].values[k + 1] = cur[i];
  }
  for (std::size_t i = 0; i < m; ++i)
    bundle.paths[i].floor_hits = steppers[i].floor_hits();
  return bundle;
}

HittingTime hitting_time(const BesselPath& path, double level) {
  if (!(level >= 0.0))
    throw std::invalid_argument("hitting_time: level must be >= 0");
  HittingTime ht;
  ht.level = level;
  if (level == 0.0 && path.absorption_time) {
    ht.time = *path.absorption_time;
    return ht;
  }
  if (path.values[0] <= level) {
    ht.time = path.grid.t0;
    return ht;
  }
  const double dt = path.grid.dt();
  for (std::size_t k = 1; k < path.values.size(); ++k) {
    if (path.values[k] <= level) {
      const double a = path.values[k - 1];
      const double b = path.values[k];
      const double frac = (a == b) ? 1.0 : (a - level) / (a - b);
      ht.time = path.grid.node(k - 1) + frac * dt;
      return ht;
    }
  }
  return ht;  // +inf sentinel
}

double sample_besq(double x_sq, double delta, double t, PathRng& rng) {
  if (!(delta > 0.0)) throw std::invalid_argument("sample_besq: delta > 0");
  if (!(x_sq >= 0.0)) throw std::invalid_argument("sample_besq: x_sq >= 0");
  if (t == 0.0) return x_sq;
  if (!(t > 0.0)) throw std::invalid_argument("sample_besq: t must be >= 0");

  const double lambda = x_sq / t;  // noncentrality
  double chi;
  if (lambda == 0.0) {
    chi = 2.0 * rng.gamma(0.5 * delta);
  } else if (delta > 1.0) {
    const double z = rng.gaussian() + std::sqrt(lambda);
    const double rest =
        (delta > 1.0 + 1e-14) ? 2.0 * rng.gamma(0.5 * (delta - 1.0)) : 0.0;
    chi = z * z + rest;
  } else {
    // Poisson mixture of central chi-squares
    long n = 0;
    const double l = std::exp(-0.5 * lambda);
    double p = rng.uniform();
    while (p > l) {
      p *= rng.uniform();
      ++n;
    }
    chi = 2.0 * rng.gamma(0.5 * delta + static_cast<double>(n));
  }
  return t * chi;
}

}  // namespace besselflow
