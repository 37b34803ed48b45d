// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "besselflow/bessel.hpp"

namespace besselflow {

// Flat key = value experiment configuration. Unknown keys are rejected so a
// typo in a parameter name cannot silently change an experiment.
struct ExperimentConfig {
  std::string experiment;
  std::string variant;           // experiment-specific sub-case
  double delta = 0.0;
  double x = 1.0;
  double y = 0.0;
  double c = 2.0;                // scaling factor
  double t = 1.0;                // time/horizon of the statistic
  double q = 0.5;                // time fraction (time-reversal)
  double eps = 0.1;              // lower end of the sup time window
  std::vector<double> x_ladder;
  std::vector<double> gap_ladder;
  long n_steps = 4096;           // uniform steps, or per-path budget
  long n_paths = 10000;
  int order = 1;                 // derivative order n
  double gamma_exp = 0.5;
  double eta = 1.0 / 64.0;       // adaptive relative step
  std::uint64_t seed = 42;
  bool seed_set = false;
  Scheme scheme = Scheme::euler_floor;
};

struct ConfigError {
  int line = 0;
  std::string message;
};

// Parses the key = value text format ('#' comments, blank lines allowed).
// Throws std::runtime_error with a line-anchored message on malformed input
// or unknown keys.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);

// Per-experiment parameter validation (delta ranges, ladders, orders).
// Throws std::runtime_error naming the violated rule.
void validate_config(const ExperimentConfig& cfg);

// The shipped defaults for each named experiment; `verify <name>` with no
// config runs these.
ExperimentConfig default_config(const std::string& experiment);

std::vector<std::string> experiment_names();

}  // namespace besselflow
