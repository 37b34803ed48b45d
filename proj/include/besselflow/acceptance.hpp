// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "besselflow/report.hpp"

namespace besselflow {

struct CriterionResult {
  int id = 0;
  std::string slug;
  bool passed = false;
  std::vector<ExperimentResult> experiments;
};

struct SuiteResult {
  std::vector<CriterionResult> criteria;
  bool all_passed = true;
};

std::string to_json(const CriterionResult& c);

// Runs the full verification suite. One line per criterion is written to
// `log` (when non-null) as it completes; when out_dir is non-empty, one JSON
// report per criterion is written there. Byte-identical output for a fixed
// seed, independent of the worker count.
SuiteResult run_acceptance_suite(std::uint64_t seed, int workers,
                                 const std::string& out_dir,
                                 std::ostream* log);

}  // namespace besselflow
