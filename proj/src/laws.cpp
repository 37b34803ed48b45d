// SPDX-License-Identifier: Apache-2.0
#include "besselflow/laws.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "besselflow/special.hpp"

namespace besselflow::laws {

double sample_gamma(double nu, PathRng& rng) {
  if (!(nu > 0.0)) throw std::invalid_argument("sample_gamma: nu must be > 0");
  return rng.gamma(nu);
}

double gamma_cdf(double nu, double v) {
  if (!(nu > 0.0)) throw std::invalid_argument("gamma_cdf: nu must be > 0");
  return gamma_p(nu, v);
}

double gamma_quantile(double nu, double p) {
  if (!(nu > 0.0)) throw std::invalid_argument("gamma_quantile: nu must be > 0");
  return gamma_p_inv(nu, p);
}

double sample_dufresne_u1(double delta, double nu, PathRng& rng, U1Route route,
                          const U1IntegralOpts& opts) {
  if (!(nu > 0.0))
    throw std::invalid_argument("sample_dufresne_u1: context requires nu > 0");
  if (route == U1Route::gamma) {
    return 2.0 * (delta - 1.0) / rng.gamma(nu);
  }
  // trapezoid of exp(B_u - nu*u/2) on a uniform grid
  const double du = opts.du;
  const double sdu = std::sqrt(du);
  double expo = 0.0;        // B_u - nu*u/2 at the current node
  double prev = 1.0;        // integrand at the current node
  double integral = 0.0;
  double u = 0.0;
  while (u < opts.horizon) {
    expo += sdu * rng.gaussian() - 0.5 * nu * du;
    const double cur = std::exp(expo);
    integral += 0.5 * du * (prev + cur);
    prev = cur;
    u += du;
    if (u > opts.min_horizon && cur < opts.tail_rel * integral) break;
  }
  return (delta - 1.0) * integral;
}

double u1_cdf(double delta, double nu, double u) {
  if (!(nu > 0.0)) throw std::invalid_argument("u1_cdf: nu must be > 0");
  if (u <= 0.0) return 0.0;
  return gamma_q(nu, 2.0 * (delta - 1.0) / u);
}

static double tau0_index(double delta) {
  if (!(delta > 1.0 && delta < 2.0))
    throw std::invalid_argument(
        "tau0: requires delta in (1,2); for delta >= 2 the process never "
        "hits zero");
  return 1.0 - 0.5 * delta;
}

double sample_tau0(double x, double delta, PathRng& rng) {
  if (!(x > 0.0)) throw std::invalid_argument("sample_tau0: x must be > 0");
  const double nu = tau0_index(delta);
  return x * x / (2.0 * rng.gamma(nu));
}

double tau0_cdf(double x, double delta, double t) {
  if (!(x > 0.0)) throw std::invalid_argument("tau0_cdf: x must be > 0");
  const double nu = tau0_index(delta);
  if (t <= 0.0) return 0.0;
  return gamma_q(nu, x * x / (2.0 * t));
}

double tau0_quantile(double x, double delta, double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("tau0_quantile: p must be in (0,1)");
  const double nu = tau0_index(delta);
  // P(tau0 <= t) = p  <=>  G at the (1-p) lower quantile
  const double g = gamma_p_inv(nu, 1.0 - p);
  return x * x / (2.0 * g);
}

double sample_t1(PathRng& rng) {
  double xi = rng.gaussian();
  while (xi == 0.0) xi = rng.gaussian();
  return 1.0 / (xi * xi);
}

double t1_cdf(double t) {
  if (t <= 0.0) return 0.0;
  return std::erfc(1.0 / std::sqrt(2.0 * t));
}

RegularityThreshold n_delta(double delta) {
  if (!(delta > 1.0))
    throw std::invalid_argument("n_delta: requires delta > 1");
  RegularityThreshold r;
  r.delta = delta;
  if (delta == 2.0)
    r.n_delta = std::numeric_limits<double>::infinity();
  else if (delta > 2.0)
    r.n_delta = 2.0 + 1.0 / (delta - 2.0);
  else
    r.n_delta = 1.0 / (2.0 - delta);
  return r;
}

int derivative_count(double delta) {
  const double nd = n_delta(delta).n_delta;
  if (std::isinf(nd)) return std::numeric_limits<int>::max();
  int count = 0;
  for (int n = 1; static_cast<double>(n) < nd; ++n) count = n;
  return count;
}

bool flow_integral_convergent(double alpha, double beta, double delta) {
  return alpha * (delta - 1.0) + (beta - 2.0) * (delta - 2.0) > 0.0;
}

}  // namespace besselflow::laws
