// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "besselflow/bell.hpp"
#include "besselflow/bessel.hpp"

namespace besselflow {

// Streaming evaluator of the flow-derivative machinery along one path.
// Per step it advances
//   - the running integral of rho^-2 (so h and Y = exp(h)),
//   - d^k h by trapezoid quadrature of the generated integrand forms and
//     d^m rho = Y * P_{m-1}(h) assembled from the Bell polynomials,
//   - optionally the hand-derived variational ODEs for d^m rho (m <= 3) by
//     Crank-Nicolson, as an independent route to the same quantities.
// The two routes discretize differently and agree only up to O(dt).
class FlowTracker {
 public:
  FlowTracker(double delta, int n_max, bool with_ode_route);

  // rho0 is the path value at t=0; floor guards the integrands (use the
  // scheme floor of the driving discretization).
  void init(double rho0, double floor);
  void advance(double rho_prev, double rho_next, double dt, double floor);
  // Stopped-mode absorption: Y and every derivative vanish from tau0 on.
  void mark_absorbed();

  bool absorbed() const { return absorbed_; }
  double inv_square_integral() const { return i2_; }
  double h() const { return h_; }
  double first_derivative() const { return y_; }
  double dh(int k) const { return dh_.at(static_cast<std::size_t>(k - 1)); }
  double drho(int m) const {
    return drho_.at(static_cast<std::size_t>(m - 1));
  }
  double drho_ode(int m) const {
    return ode_v_.at(static_cast<std::size_t>(m - 1));
  }
  int order() const { return n_max_; }
  bool has_ode_route() const { return with_ode_; }

  // P_k evaluated at the current dh stack (k < n_max).
  double bell_value(int k) const;

 private:
  double delta_;
  double c_;  // (delta-1)/2
  int n_max_;
  bool with_ode_;
  std::vector<BellPolynomial> bell_;
  std::vector<DhForm> forms_;

  bool absorbed_ = false;
  double i2_ = 0.0;
  double h_ = 0.0;
  double y_ = 1.0;
  double u_prev_ = 0.0;        // 1/rho_hat^2 at the previous node
  double rho_hat_prev_ = 0.0;
  std::vector<double> dh_;
  std::vector<double> drho_;
  std::vector<double> integrand_prev_;  // one per dh order
  std::vector<double> ode_v_;
};

// Running trapezoidal integral of rho^-2 along a path (no prefactor).
// Stops accumulating at absorption; guarded by the scheme floor.
std::vector<double> inverse_square_integral(const BesselPath& path);

// Y_t = exp(-((delta-1)/2) * int rho^-2); zero from absorption onward in
// stopped mode.
std::vector<double> first_derivative(const BesselPath& path);

struct IncrementRatio {
  std::vector<double> closed_form;  // Z^{y,x} = exp(-c int (rho^y rho^x)^-1)
  std::vector<double> raw;          // (rho^y - rho^x)/(y - x)
};

IncrementRatio increment_ratio(const FlowBundle& bundle, std::size_t ix,
                               std::size_t iy);

// Node arrays of everything the tracker computes, plus a per-order record
// of how far the two routes drifted apart (flagged, never repaired).
struct DerivativeStack {
  const BesselPath* path = nullptr;
  std::vector<double> h;
  std::vector<double> y;
  std::vector<std::vector<double>> dh;        // [k-1][node], k = 1..n-1
  std::vector<std::vector<double>> drho;      // [m-1][node], m = 1..n
  std::vector<std::vector<double>> drho_ode;  // m = 1..min(n,3)
  std::vector<double> route_gap;              // terminal relative gap per m
  bool route_flagged = false;
};

DerivativeStack derivative_stack(const BesselPath& path, double delta, int n,
                                 double route_tolerance = 0.01);

struct BoundStatistics {
  std::vector<double> b;  // b_1..b_n
  std::vector<double> B;  // B_1..B_n, B_n = sum_{k<=n} b_k^{1/k}
  bool truncation_ok = true;
};

// Truncated b_k = x^k int_0^T Y^k / rho^(k+2) ds over the path horizon.
// truncation_ok is cleared when the integrand tail has not decayed below
// tail_rel times the running integral by the end of the horizon.
BoundStatistics bound_statistics(const BesselPath& path, double delta, int n,
                                 double tail_rel = 1e-8);

// U-chain: U_k = u1 (u1 - 1) ... (u1 - k + 1).
double u_chain(double u1, int k);

struct UStatistics {
  double u1 = 0.0;                // x * dh(1) at the horizon
  std::vector<double> chain;      // U_1..U_n from the product chain
  std::vector<double> direct;     // x^k P_k(h) at the horizon
  bool truncation_ok = true;
};

UStatistics u_statistics(const BesselPath& path, double delta, int n);

}  // namespace besselflow
