// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace besselflow {

// Regularized lower incomplete gamma P(a,x) and its complement Q(a,x).
double gamma_p(double a, double x);
double gamma_q(double a, double x);

// Inverse of P(a,.) by bracketed bisection; good to ~1e-12 relative.
double gamma_p_inv(double a, double p);

// Standard normal cdf.
double normal_cdf(double z);

}  // namespace besselflow
