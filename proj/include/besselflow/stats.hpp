// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace besselflow::stats {

struct StatReport {
  std::string name;
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  double statistic = 0.0;
  std::optional<double> p_value;
  std::optional<std::pair<double, double>> ci;
  std::string criterion;  // human-readable pass rule
  bool passed = false;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, double>> details;
  std::vector<std::string> flags;
};

// Asymptotic Kolmogorov-Smirnov machinery. Sample sizes below 50 are
// rejected; every consumer here works at n >= 10^3 where the asymptotic
// p-value is accurate.
double ks_statistic_one_sample(std::vector<double> samples,
                               const std::function<double(double)>& cdf);
double ks_statistic_two_sample(std::vector<double> a, std::vector<double> b);

StatReport ks_one_sample(const std::vector<double>& samples,
                         const std::function<double(double)>& cdf,
                         double p_threshold = 0.01);
StatReport ks_two_sample(const std::vector<double>& a,
                         const std::vector<double>& b,
                         double p_threshold = 0.01);

// Survival function of the asymptotic KS law at lambda.
double ks_asymptotic_p(double lambda);

struct SlopeFit {
  std::vector<double> abscissae;
  std::vector<double> ordinates;
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_slope = 0.0;
};

SlopeFit slope_fit(const std::vector<double>& xs,
                   const std::vector<double>& ys);

// Sample gamma-moment of |samples| with a seeded percentile-bootstrap CI.
// When the admissible band edge is supplied and gamma reaches it, a warning
// flag is attached (the moment may be infinite).
StatReport moment_estimate(const std::vector<double>& samples,
                           double gamma_exponent, std::uint64_t seed,
                           std::optional<double> gamma_band_max = {},
                           int n_resamples = 1000);

double quantile_sorted(const std::vector<double>& sorted, double q);

// Deterministic data-parallel map: fn(i) for i in [0, n). Results must be
// written to per-index slots; the partition is static so any worker count
// yields identical output.
void parallel_for(std::size_t n, int workers,
                  const std::function<void(std::size_t)>& fn);

}  // namespace besselflow::stats
