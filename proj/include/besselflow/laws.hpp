// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

#include "besselflow/rng.hpp"

namespace besselflow::laws {

// --- Gamma(nu, 1) -----------------------------------------------------------

double sample_gamma(double nu, PathRng& rng);
double gamma_cdf(double nu, double v);
double gamma_quantile(double nu, double p);

// --- Dufresne limit U1 ------------------------------------------------------
//
// U1 is distributed as 2(delta-1)/Z_nu with Z_nu ~ Gamma(nu,1). The gamma
// route draws exactly from that representation; the integral route
// integrates (delta-1) * int_0^H exp(B_u - nu*u/2) du by trapezoid on a
// uniform grid and matches the gamma route in law as the step shrinks.

enum class U1Route { gamma, integral };

struct U1IntegralOpts {
  double du = 0.005;    // time step of the Euler/trapezoid integration
  double horizon = 200; // hard cap on the integration horizon
  // stop early once the integrand is this small relative to the running
  // integral (the exponent drifts to -inf, so the tail is negligible)
  double tail_rel = 1e-9;
  double min_horizon = 20.0;
};

double sample_dufresne_u1(double delta, double nu, PathRng& rng,
                          U1Route route = U1Route::gamma,
                          const U1IntegralOpts& opts = {});
double u1_cdf(double delta, double nu, double u);

// nu indices used by the two asymptotic regimes.
inline double u1_nu_high(double delta) { return 2.0 * delta - 3.0; }  // delta >= 2
inline double u1_nu_low(double delta) { return 5.0 - 2.0 * delta; }   // 1 < delta < 2

// --- First zero tau0(x), 1 < delta < 2 --------------------------------------
//
// tau0(x) has the law x^2 / (2 G) with G ~ Gamma(1 - delta/2, 1).

double sample_tau0(double x, double delta, PathRng& rng);
double tau0_cdf(double x, double delta, double t);
double tau0_quantile(double x, double delta, double p);

// --- Brownian first passage of level 1 ---------------------------------------

double sample_t1(PathRng& rng);
double t1_cdf(double t);

// --- Regularity threshold n(delta) -------------------------------------------

struct RegularityThreshold {
  double delta = 0.0;
  double n_delta = 0.0;  // +inf at delta == 2
};

RegularityThreshold n_delta(double delta);

// Number of derivative orders n >= 1 with n < n(delta).
int derivative_count(double delta);

// --- Convergence predicate for int_0^inf Y^alpha / rho^beta ------------------

bool flow_integral_convergent(double alpha, double beta, double delta);

}  // namespace besselflow::laws
