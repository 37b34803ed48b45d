// SPDX-License-Identifier: Apache-2.0
//
// Runs every acceptance criterion at its pinned configuration and prints one
// pass/fail line per criterion. Exit status 0 iff all pass.

#include <iostream>

#include "besselflow/acceptance.hpp"

int main() {
  const auto suite =
      besselflow::run_acceptance_suite(42, 1, "acceptance_reports",
                                       &std::cout);
  return suite.all_passed ? 0 : 1;
}
