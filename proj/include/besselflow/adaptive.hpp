// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "besselflow/bessel.hpp"
#include "besselflow/rng.hpp"

namespace besselflow {

// State-adaptive stepping: dt = eta * max(rho, rho_floor)^2. The step size
// follows the natural diffusive scale of the process, so runs spanning many
// decades of time (x -> 0 ladders, heavy-tailed first zeros, last passages)
// stay at a fixed relative resolution for a logarithmic step count.
struct AdaptiveOpts {
  double eta = 1.0 / 64.0;
  double rho_floor = 0.0;   // lower bound for the dt scale (free runs near 0)
  double dt_max = std::numeric_limits<double>::infinity();
  double stop_value = 0.0;  // absorb once rho <= stop_value (stopped runs)
  double stop_above = std::numeric_limits<double>::infinity();
  long max_steps = 1L << 22;
};

struct AdaptiveResult {
  double t = 0.0;
  double value = 0.0;
  bool absorbed = false;
  bool exited_above = false;
  bool budget_exhausted = false;
  long steps = 0;
  long floor_hits = 0;
};

// Single path. on_step(t_prev, dt, rho_prev, rho_next) fires once per step
// (for the absorbing partial step, with the linearly interpolated endpoint);
// on_snapshot(i, rho) fires when t lands exactly on snapshots[i].
template <class OnStep, class OnSnapshot>
AdaptiveResult adaptive_bessel_run(double x0, double delta, PathRng& rng,
                                   double horizon,
                                   std::span<const double> snapshots,
                                   Mode mode, const AdaptiveOpts& opts,
                                   OnStep&& on_step, OnSnapshot&& on_snapshot) {
  BesselStepper stepper(x0, delta, Scheme::euler_floor, mode);
  AdaptiveResult res;
  res.value = x0;
  double t = 0.0;
  std::size_t snap = 0;
  while (snap < snapshots.size() && snapshots[snap] <= 0.0) {
    on_snapshot(snap, stepper.value());
    ++snap;
  }
  while (t < horizon) {
    if (res.steps >= opts.max_steps) {
      res.budget_exhausted = true;
      break;
    }
    const double scale = std::max(stepper.value(), opts.rho_floor);
    double dt = std::min(opts.eta * scale * scale, opts.dt_max);
    double t_target = horizon;
    if (snap < snapshots.size()) t_target = std::min(t_target, snapshots[snap]);
    bool lands = false;
    if (t + dt >= t_target) {
      dt = t_target - t;
      lands = true;
    }
    if (!(dt > 0.0)) {  // scale underflow; treat as absorbed in place
      res.absorbed = true;
      break;
    }
    const double rho_prev = stepper.value();
    double rho_next = stepper.step(std::sqrt(dt) * rng.gaussian(), dt);
    ++res.steps;
    if (stepper.absorbed()) {
      const double frac = stepper.crossing_fraction();
      const double dt_eff = frac * dt;
      rho_next = 0.0;
      on_step(t, dt_eff > 0.0 ? dt_eff : dt, rho_prev, rho_next);
      t += dt_eff;
      res.absorbed = true;
      break;
    }
    on_step(t, dt, rho_prev, rho_next);
    t = lands ? t_target : t + dt;
    if (lands && snap < snapshots.size() && t_target == snapshots[snap]) {
      on_snapshot(snap, rho_next);
      ++snap;
    }
    if (mode == Mode::stopped_at_zero && rho_next <= opts.stop_value) {
      res.absorbed = true;
      break;
    }
    if (rho_next >= opts.stop_above) {
      res.exited_above = true;
      break;
    }
  }
  res.t = t;
  res.value = stepper.value();
  res.floor_hits = stepper.floor_hits();
  return res;
}

template <class OnStep>
AdaptiveResult adaptive_bessel_run(double x0, double delta, PathRng& rng,
                                   double horizon, Mode mode,
                                   const AdaptiveOpts& opts, OnStep&& on_step) {
  return adaptive_bessel_run(x0, delta, rng, horizon,
                             std::span<const double>{}, mode, opts,
                             static_cast<OnStep&&>(on_step),
                             [](std::size_t, double) {});
}

struct FamilyResult {
  double tau = 0.0;        // absorption time of the lowest member
  bool absorbed = false;
  bool budget_exhausted = false;
  long steps = 0;
  long order_violations = 0;
  std::vector<double> values;  // member values at the stopping time
};

// Ordered family driven by one noise stream; the step size follows the
// lowest member, whose first zero terminates the run. Member ordering is
// enforced each step as in simulate_flow.
// on_step(t_prev, dt, prev_values, next_values).
template <class OnStep>
FamilyResult adaptive_family_to_zero(std::span<const double> xs, double delta,
                                     PathRng& rng, const AdaptiveOpts& opts,
                                     OnStep&& on_step) {
  const std::size_t m = xs.size();
  std::vector<double> prev(xs.begin(), xs.end());
  std::vector<double> next(m, 0.0);
  FamilyResult res;
  const double c = 0.5 * (delta - 1.0);
  double t = 0.0;
  bool final_in_next = false;
  for (;;) {
    if (res.steps >= opts.max_steps) {
      res.budget_exhausted = true;
      break;
    }
    const double dt = std::min(opts.eta * prev[0] * prev[0], opts.dt_max);
    if (!(dt > 0.0)) {
      res.absorbed = true;
      break;
    }
    const double db = std::sqrt(dt) * rng.gaussian();
    for (std::size_t i = 0; i < m; ++i)
      next[i] = prev[i] + db + c * dt / prev[i];
    for (std::size_t i = 1; i < m; ++i) {
      if (next[i] < next[i - 1]) {
        next[i] = next[i - 1];
        ++res.order_violations;
      }
    }
    ++res.steps;
    if (next[0] <= 0.0) {
      // partial step to the interpolated crossing of the lowest member
      const double frac = prev[0] / (prev[0] - next[0]);
      for (std::size_t i = 0; i < m; ++i)
        next[i] = prev[i] + frac * (next[i] - prev[i]);
      next[0] = 0.0;
      on_step(t, frac * dt, prev, next);
      t += frac * dt;
      res.absorbed = true;
      final_in_next = true;
      break;
    }
    on_step(t, dt, prev, next);
    t += dt;
    if (next[0] <= opts.stop_value) {
      res.absorbed = true;
      final_in_next = true;
      break;
    }
    prev.swap(next);
  }
  res.tau = t;
  res.values = final_in_next ? next : prev;
  return res;
}

}  // namespace besselflow
