// SPDX-License-Identifier: Apache-2.0
#include "besselflow/bell.hpp"

#include <cmath>
#include <stdexcept>

namespace besselflow {

namespace {

double pow_int(double base, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

void add_term(std::map<MultiIndex, long long>& terms, MultiIndex idx,
              long long coeff) {
  idx.trim();
  auto [it, inserted] = terms.emplace(std::move(idx), coeff);
  if (!inserted) {
    it->second += coeff;
    if (it->second == 0) terms.erase(it);
  }
}

MultiIndex bumped(const MultiIndex& idx, int r_down, int r_up) {
  MultiIndex out = idx;
  const std::size_t need = static_cast<std::size_t>(std::max(r_down, r_up));
  if (out.parts.size() < need) out.parts.resize(need, 0);
  if (r_down > 0) --out.parts[static_cast<std::size_t>(r_down - 1)];
  if (r_up > 0) ++out.parts[static_cast<std::size_t>(r_up - 1)];
  return out;
}

}  // namespace

double BellPolynomial::eval(std::span<const double> dh) const {
  double sum = 0.0;
  for (const auto& [idx, coeff] : terms) {
    double prod = static_cast<double>(coeff);
    for (std::size_t r = 0; r < idx.parts.size(); ++r) {
      if (idx.parts[r] == 0) continue;
      if (r >= dh.size())
        throw std::invalid_argument("BellPolynomial::eval: missing dh order");
      prod *= pow_int(dh[r], idx.parts[r]);
    }
    sum += prod;
  }
  return sum;
}

std::vector<BellPolynomial> bell_polynomials(int n_max) {
  if (n_max < 0) throw std::invalid_argument("bell_polynomials: n_max >= 0");
  std::vector<BellPolynomial> out(static_cast<std::size_t>(n_max) + 1);
  out[0].order = 0;
  out[0].terms[MultiIndex{}] = 1;  // P_0 = 1
  for (int n = 0; n < n_max; ++n) {
    BellPolynomial next;
    next.order = n + 1;
    for (const auto& [idx, coeff] : out[static_cast<std::size_t>(n)].terms) {
      // (dh) * monomial
      add_term(next.terms, bumped(idx, 0, 1), coeff);
      // d(monomial) by Leibniz: one factor's order raised per term
      for (std::size_t r = 0; r < idx.parts.size(); ++r) {
        if (idx.parts[r] == 0) continue;
        add_term(next.terms, bumped(idx, static_cast<int>(r + 1),
                                    static_cast<int>(r + 2)),
                 coeff * idx.parts[r]);
      }
    }
    out[static_cast<std::size_t>(n + 1)] = std::move(next);
  }
  return out;
}

double DhForm::eval(std::span<const double> drho, double rho_hat) const {
  double sum = 0.0;
  for (const DhTerm& term : terms) {
    double prod = static_cast<double>(term.coeff);
    for (std::size_t r = 0; r < term.index.parts.size(); ++r) {
      if (term.index.parts[r] == 0) continue;
      if (r >= drho.size())
        throw std::invalid_argument("DhForm::eval: missing drho order");
      prod *= pow_int(drho[r], term.index.parts[r]);
    }
    sum += prod / pow_int(rho_hat, 2 + term.j);
  }
  return sum;
}

std::vector<DhForm> dh_forms(int k_max) {
  if (k_max < 1) throw std::invalid_argument("dh_forms: k_max >= 1");
  std::vector<DhForm> out(static_cast<std::size_t>(k_max));
  // k = 1: (delta-1) * int (drho) / rho^3
  out[0].order = 1;
  out[0].terms.push_back(DhTerm{1, MultiIndex{{1}}, 1});
  for (int k = 1; k < k_max; ++k) {
    // the denominator power is determined by the index weight, so terms can
    // be merged on the numerator index alone
    std::map<MultiIndex, long long> acc;
    for (const DhTerm& term : out[static_cast<std::size_t>(k - 1)].terms) {
      // Leibniz on the numerator monomial
      for (std::size_t r = 0; r < term.index.parts.size(); ++r) {
        if (term.index.parts[r] == 0) continue;
        add_term(acc, bumped(term.index, static_cast<int>(r + 1),
                             static_cast<int>(r + 2)),
                 term.coeff * term.index.parts[r]);
      }
      // derivative of rho^-(2+j): adds a drho factor, deepens the power
      add_term(acc, bumped(term.index, 0, 1),
               -term.coeff * static_cast<long long>(2 + term.j));
    }
    DhForm form;
    form.order = k + 1;
    for (auto& [idx, coeff] : acc) {
      DhTerm t;
      t.coeff = coeff;
      t.index = idx;
      t.j = idx.weight();
      form.terms.push_back(std::move(t));
    }
    out[static_cast<std::size_t>(k)] = std::move(form);
  }
  return out;
}

}  // namespace besselflow
