// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "besselflow/rng.hpp"

namespace besselflow {

// Uniform time grid on [t0, t_end] with n_steps steps (n_steps+1 nodes).
struct TimeGrid {
  double t0 = 0.0;
  double t_end = 1.0;
  std::size_t n_steps = 0;

  TimeGrid() = default;
  TimeGrid(double start, double end, std::size_t steps)
      : t0(start), t_end(end), n_steps(steps) {
    if (!(t0 >= 0.0)) throw std::invalid_argument("TimeGrid: t0 must be >= 0");
    if (!(t_end > t0))
      throw std::invalid_argument("TimeGrid: t_end must exceed t0");
    if (n_steps == 0)
      throw std::invalid_argument("TimeGrid: n_steps must be positive");
  }

  double dt() const { return (t_end - t0) / static_cast<double>(n_steps); }
  std::size_t n_nodes() const { return n_steps + 1; }
  double node(std::size_t i) const {
    return t0 + dt() * static_cast<double>(i);
  }
};

// Brownian increments over a grid, one N(0, dt) draw per step.
struct NoisePath {
  TimeGrid grid;
  std::vector<double> increments;
};

// Deterministic given (seed, stream): the same arguments always produce
// bitwise-identical increments.
NoisePath generate_noise(const TimeGrid& grid, std::uint64_t seed,
                         std::uint64_t stream = 0);

}  // namespace besselflow
