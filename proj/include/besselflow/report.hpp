// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "besselflow/config.hpp"
#include "besselflow/stats.hpp"

namespace besselflow {

// Outcome of one named experiment: the sub-reports it ran plus an overall
// verdict. Serialization is byte-stable for a fixed config and seed (no
// timestamps, insertion-ordered keys).
struct ExperimentResult {
  std::string experiment;
  ExperimentConfig config;
  bool passed = false;
  std::vector<stats::StatReport> reports;
};

std::string to_json(const ExperimentResult& result);
std::string to_json(const stats::StatReport& report);

void write_text_file(const std::string& path, const std::string& content);

// Long-format CSV: header "path_id,t,value".
void write_paths_csv(const std::string& path,
                     const std::vector<std::vector<double>>& values,
                     const std::vector<double>& times);

// Single-column CSV of law draws: header "index,value".
void write_draws_csv(const std::string& path,
                     const std::vector<double>& draws);

}  // namespace besselflow
