// SPDX-License-Identifier: Apache-2.0
#include "besselflow/stats.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "besselflow/rng.hpp"

namespace besselflow::stats {

namespace {
constexpr std::size_t kMinSamples = 50;

double ks_lambda(double d, double n_effective) {
  const double rn = std::sqrt(n_effective);
  return (rn + 0.12 + 0.11 / rn) * d;
}
}  // namespace

double ks_asymptotic_p(double lambda) {
  if (lambda <= 0.0) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 200; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += sign * term;
    sign = -sign;
    if (term < 1e-16) break;
  }
  return std::min(1.0, std::max(0.0, 2.0 * sum));
}

double ks_statistic_one_sample(std::vector<double> samples,
                               const std::function<double(double)>& cdf) {
  if (samples.size() < kMinSamples)
    throw std::invalid_argument("ks_one_sample: need at least 50 samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max(d, std::max(f - static_cast<double>(i) / n,
                             static_cast<double>(i + 1) / n - f));
  }
  return d;
}

double ks_statistic_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.size() < kMinSamples || b.size() < kMinSamples)
    throw std::invalid_argument("ks_two_sample: need at least 50 samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const double t = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= t) ++i;
    while (j < b.size() && b[j] <= t) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / na -
                              static_cast<double>(j) / nb));
  }
  return d;
}

StatReport ks_one_sample(const std::vector<double>& samples,
                         const std::function<double(double)>& cdf,
                         double p_threshold) {
  StatReport r;
  r.name = "ks_one_sample";
  r.n1 = samples.size();
  r.statistic = ks_statistic_one_sample(samples, cdf);
  r.p_value = ks_asymptotic_p(ks_lambda(r.statistic,
                                        static_cast<double>(samples.size())));
  r.criterion = "p > " + std::to_string(p_threshold);
  r.passed = *r.p_value > p_threshold;
  return r;
}

StatReport ks_two_sample(const std::vector<double>& a,
                         const std::vector<double>& b, double p_threshold) {
  StatReport r;
  r.name = "ks_two_sample";
  r.n1 = a.size();
  r.n2 = b.size();
  r.statistic = ks_statistic_two_sample(a, b);
  const double ne = static_cast<double>(a.size()) *
                    static_cast<double>(b.size()) /
                    static_cast<double>(a.size() + b.size());
  r.p_value = ks_asymptotic_p(ks_lambda(r.statistic, ne));
  r.criterion = "p > " + std::to_string(p_threshold);
  r.passed = *r.p_value > p_threshold;
  return r;
}

SlopeFit slope_fit(const std::vector<double>& xs,
                   const std::vector<double>& ys) {
  if (xs.size() != ys.size())
    throw std::invalid_argument("slope_fit: size mismatch");
  const std::size_t n = xs.size();
  if (n < 3) throw std::invalid_argument("slope_fit: need at least 3 points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx <= 0.0)
    throw std::invalid_argument("slope_fit: degenerate abscissae");
  SlopeFit fit;
  fit.abscissae = xs;
  fit.ordinates = ys;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
    ss_res += r * r;
  }
  fit.stderr_slope =
      std::sqrt(ss_res / (static_cast<double>(n - 2) * sxx + 1e-300));
  return fit;
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("quantile: empty sample");
  if (q <= 0.0) return sorted.front();
  if (q >= 1.0) return sorted.back();
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(lo);
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
}

StatReport moment_estimate(const std::vector<double>& samples,
                           double gamma_exponent, std::uint64_t seed,
                           std::optional<double> gamma_band_max,
                           int n_resamples) {
  if (samples.empty())
    throw std::invalid_argument("moment_estimate: empty sample");
  StatReport r;
  r.name = "moment_estimate";
  r.n1 = samples.size();
  r.seed = seed;
  std::vector<double> powered(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i)
    powered[i] = std::pow(std::fabs(samples[i]), gamma_exponent);
  double mean = 0.0;
  for (double v : powered) mean += v;
  mean /= static_cast<double>(powered.size());
  r.statistic = mean;

  PathRng rng(seed, 0xb007);
  std::vector<double> boot(static_cast<std::size_t>(n_resamples));
  const std::size_t n = powered.size();
  for (auto& bv : boot) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      s += powered[rng.next_u64() % n];
    bv = s / static_cast<double>(n);
  }
  std::sort(boot.begin(), boot.end());
  r.ci = {quantile_sorted(boot, 0.025), quantile_sorted(boot, 0.975)};
  r.details.emplace_back("gamma", gamma_exponent);
  if (gamma_band_max && gamma_exponent >= *gamma_band_max)
    r.flags.push_back("gamma at or beyond admissible band; moment may be "
                      "infinite");
  r.passed = true;
  return r;
}

void parallel_for(std::size_t n, int workers,
                  const std::function<void(std::size_t)>& fn) {
  if (workers <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const std::size_t w = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
  std::vector<std::thread> pool;
  pool.reserve(w);
  std::exception_ptr err;
  std::mutex err_mu;
  for (std::size_t t = 0; t < w; ++t) {
    pool.emplace_back([&, t]() {
      try {
        for (std::size_t i = t; i < n; i += w) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!err) err = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace besselflow::stats
