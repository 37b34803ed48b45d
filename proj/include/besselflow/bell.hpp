// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

namespace besselflow {

// Multi-index I = (i_1, ..., i_n): i_r is the multiplicity of the r-th
// derivative factor. Stored with trailing zeros trimmed, so equal indices
// compare equal regardless of the order they were built for.
struct MultiIndex {
  std::vector<int> parts;

  int order() const {  // sum r * i_r
    int n = 0;
    for (std::size_t r = 0; r < parts.size(); ++r)
      n += static_cast<int>(r + 1) * parts[r];
    return n;
  }
  int weight() const {  // j = sum i_r
    int j = 0;
    for (int p : parts) j += p;
    return j;
  }
  void trim() {
    while (!parts.empty() && parts.back() == 0) parts.pop_back();
  }
  auto operator<=>(const MultiIndex&) const = default;
};

// P_n as an exact integer-coefficient polynomial in (dh, d2h, ...): the
// monomial keyed by I is prod_r (d^r h)^{i_r}. P_0 is the constant 1.
struct BellPolynomial {
  int order = 0;
  std::map<MultiIndex, long long> terms;

  // dh[r-1] holds the value of the r-th derivative factor.
  double eval(std::span<const double> dh) const;
};

// P_0..P_n via the recursion P_{n+1} = (dh) P_n + d(P_n).
std::vector<BellPolynomial> bell_polynomials(int n_max);

// Integrand of the k-th derivative of the log-derivative process:
//   d^k h_t = (delta-1) * sum_I coeff_I * int_0^t Q_I(drho) / rho^(2+j) ds
// with Q_I(drho) = prod_r (d^r rho)^{i_r} and j = weight(I). The terms are
// generated by differentiating the k=1 form and close under the recursion.
struct DhTerm {
  long long coeff = 0;
  MultiIndex index;
  int j = 0;
};

struct DhForm {
  int order = 0;  // k
  std::vector<DhTerm> terms;

  // drho[r-1] = value of d^r rho at the node; rho_hat = guarded rho value.
  // Returns the integrand without the (delta-1) prefactor.
  double eval(std::span<const double> drho, double rho_hat) const;
};

std::vector<DhForm> dh_forms(int k_max);

}  // namespace besselflow
