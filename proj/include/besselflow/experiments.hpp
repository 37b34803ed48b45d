// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "besselflow/config.hpp"
#include "besselflow/report.hpp"

namespace besselflow {

// Runs the named experiment (config.experiment) and returns its reports.
// Deterministic given the config, including across worker counts.
ExperimentResult run_experiment(const ExperimentConfig& cfg, int workers = 1);

}  // namespace besselflow
