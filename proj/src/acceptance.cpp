// SPDX-License-Identifier: Apache-2.0
#include "besselflow/acceptance.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "besselflow/adaptive.hpp"
#include "besselflow/experiments.hpp"
#include "besselflow/flow_calculus.hpp"
#include "besselflow/laws.hpp"
#include "besselflow/stats.hpp"

namespace besselflow {

namespace {

using stats::StatReport;

ExperimentResult wrap(const std::string& name, std::uint64_t seed,
                      std::vector<StatReport> reports) {
  ExperimentResult r;
  r.experiment = name;
  r.config.experiment = name;
  r.config.seed = seed;
  bool ok = true;
  for (const auto& rep : reports) ok = ok && rep.passed;
  r.passed = ok;
  r.reports = std::move(reports);
  return r;
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return stats::quantile_sorted(v, 0.5);
}

// --- criterion 1: symbolic exactness ---------------------------------------

void enumerate_indices(int n, int r, std::vector<int>& cur,
                       std::vector<std::vector<int>>& out) {
  if (n == 0) {
    out.push_back(cur);
    return;
  }
  if (r > n) return;
  // multiplicity of factor r
  for (int i = 0; i * r <= n; ++i) {
    cur.push_back(i);
    enumerate_indices(n - i * r, r + 1, cur, out);
    cur.pop_back();
  }
}

// Closed-form coefficient of prod_r (d^r h)^{i_r} in the n-th derivative of
// exp(h) over exp(h): n! / prod_r (i_r)! (r!)^{i_r}.
long long faa_di_bruno_coeff(const std::vector<int>& idx) {
  auto fact = [](int k) {
    long long f = 1;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
  };
  int n = 0;
  for (std::size_t r = 0; r < idx.size(); ++r)
    n += static_cast<int>(r + 1) * idx[r];
  long long c = fact(n);
  for (std::size_t r = 0; r < idx.size(); ++r) {
    for (int i = 0; i < idx[r]; ++i) c /= fact(static_cast<int>(r + 1));
    c /= fact(idx[r]);
  }
  return c;
}

CriterionResult criterion_bell(std::uint64_t seed) {
  const int n_max = 6;
  const auto polys = bell_polynomials(n_max);
  StatReport r;
  r.name = "bell_vs_closed_form";
  r.seed = seed;
  r.criterion = "integer equality for all coefficients, n <= 6";
  bool ok = true;
  long checked = 0;
  for (int n = 1; n <= n_max; ++n) {
    std::vector<std::vector<int>> indices;
    std::vector<int> cur;
    enumerate_indices(n, 1, cur, indices);
    const auto& terms = polys[static_cast<std::size_t>(n)].terms;
    if (terms.size() != indices.size()) ok = false;
    for (auto idx : indices) {
      MultiIndex mi{idx};
      mi.trim();
      const auto it = terms.find(mi);
      const long long want = faa_di_bruno_coeff(idx);
      if (it == terms.end() || it->second != want) ok = false;
      ++checked;
    }
  }
  r.statistic = static_cast<double>(checked);
  r.details.emplace_back("coefficients_checked", static_cast<double>(checked));
  r.passed = ok;

  CriterionResult c;
  c.id = 1;
  c.slug = "symbolic-bell-exactness";
  c.passed = ok;
  c.experiments.push_back(wrap("criterion_bell", seed, {r}));
  return c;
}

// --- criterion 2: dual-route derivatives and the order check ----------------

CriterionResult criterion_dual_route(std::uint64_t seed, int workers) {
  const double delta = 2.5;
  const double gap = 1e-3;
  const std::size_t n_paths = 100;
  const long fine_steps = 1 << 14;
  const std::uint64_t s = seed_salt(seed, "C2");

  std::vector<int> route_ok(n_paths, 0);
  std::vector<double> gap12(n_paths), gap13(n_paths), gap14(n_paths);

  stats::parallel_for(n_paths, workers, [&](std::size_t p) {
    PathRng rng(s, p);
    TimeGrid fine_grid(0.0, 1.0, static_cast<std::size_t>(fine_steps));
    NoisePath fine;
    fine.grid = fine_grid;
    fine.increments.resize(static_cast<std::size_t>(fine_steps));
    const double sdt = std::sqrt(fine_grid.dt());
    for (auto& db : fine.increments) db = sdt * rng.gaussian();

    auto coarsen = [](const NoisePath& src) {
      NoisePath dst;
      dst.grid = TimeGrid(src.grid.t0, src.grid.t_end, src.grid.n_steps / 2);
      dst.increments.resize(src.increments.size() / 2);
      for (std::size_t k = 0; k < dst.increments.size(); ++k)
        dst.increments[k] = src.increments[2 * k] + src.increments[2 * k + 1];
      return dst;
    };
    const NoisePath mid = coarsen(fine);
    const NoisePath coarse = coarsen(mid);

    auto fd_gap = [&](const NoisePath& noise) {
      FlowBundle bundle =
          simulate_flow({1.0, 1.0 + gap}, delta, noise,
                        Scheme::euler_floor, Mode::free_running);
      const auto ratio = increment_ratio(bundle, 0, 1);
      return std::fabs(ratio.raw.back() / ratio.closed_form.back() - 1.0);
    };
    gap12[p] = fd_gap(coarse);
    gap13[p] = fd_gap(mid);
    gap14[p] = fd_gap(fine);

    BesselPath path = simulate_bessel(1.0, delta, fine, Scheme::euler_floor,
                                      Mode::free_running);
    const auto stack = derivative_stack(path, delta, 3);
    bool ok = true;
    for (double g : stack.route_gap)
      if (g > 0.01) ok = false;
    route_ok[p] = ok ? 1 : 0;
  });

  const double frac_ok =
      static_cast<double>(std::count(route_ok.begin(), route_ok.end(), 1)) /
      static_cast<double>(n_paths);
  StatReport dual;
  dual.name = "dual_route_agreement";
  dual.n1 = n_paths;
  dual.statistic = frac_ok;
  dual.seed = seed;
  dual.criterion = ">= 95% of paths within 1% for n in {1,2,3}";
  dual.passed = frac_ok >= 0.95;

  const double m12 = median_of(gap12);
  const double m13 = median_of(gap13);
  const double m14 = median_of(gap14);
  StatReport fd;
  fd.name = "fd_vs_closed_form_order";
  fd.n1 = n_paths;
  fd.statistic = m14;
  fd.seed = seed;
  fd.criterion =
      "median |FD/Z - 1| < 1% at 2^14 and roughly halves per doubling";
  fd.details.emplace_back("median_gap_2e12", m12);
  fd.details.emplace_back("median_gap_2e13", m13);
  fd.details.emplace_back("median_gap_2e14", m14);
  const double r1 = m12 / std::max(m13, 1e-300);
  const double r2 = m13 / std::max(m14, 1e-300);
  fd.details.emplace_back("ratio_12_13", r1);
  fd.details.emplace_back("ratio_13_14", r2);
  fd.passed = m14 < 0.01 && r1 > 1.3 && r1 < 3.2 && r2 > 1.3 && r2 < 3.2;

  CriterionResult c;
  c.id = 2;
  c.slug = "dual-route-derivatives";
  c.passed = dual.passed && fd.passed;
  c.experiments.push_back(wrap("criterion_dual_route", seed, {dual, fd}));
  return c;
}

// --- criterion 3: marginal law vs the exact BESQ sampler --------------------

CriterionResult criterion_marginal(std::uint64_t seed, int workers) {
  CriterionResult c;
  c.id = 3;
  c.slug = "marginal-law";
  c.passed = true;
  for (double delta : {1.5, 2.5}) {
    const std::size_t n = 10000;
    const long n_steps = 1 << 12;
    std::vector<double> sim(n), exact(n);
    const std::uint64_t s_sim =
        seed_salt(seed, ("C3/sim/" + std::to_string(delta)).c_str());
    const std::uint64_t s_ex =
        seed_salt(seed, ("C3/exact/" + std::to_string(delta)).c_str());
    stats::parallel_for(n, workers, [&](std::size_t i) {
      PathRng rng(s_sim, i);
      BesselStepper stepper(1.0, delta, Scheme::euler_floor,
                            Mode::free_running);
      const double dt = 1.0 / static_cast<double>(n_steps);
      const double sdt = std::sqrt(dt);
      for (long k = 0; k < n_steps; ++k)
        stepper.step(sdt * rng.gaussian(), dt);
      sim[i] = stepper.value();
      PathRng rng2(s_ex, i);
      exact[i] = std::sqrt(sample_besq(1.0, delta, 1.0, rng2));
    });
    StatReport ks = stats::ks_two_sample(sim, exact);
    ks.name = "marginal_ks_delta=" + std::to_string(delta);
    ks.seed = seed;
    c.passed = c.passed && ks.passed;
    c.experiments.push_back(
        wrap("criterion_marginal_delta=" + std::to_string(delta), seed, {ks}));
  }
  return c;
}

// --- generic wrappers around the named experiments ---------------------------

CriterionResult criterion_from_experiments(
    int id, const std::string& slug,
    const std::vector<ExperimentConfig>& configs, int workers) {
  CriterionResult c;
  c.id = id;
  c.slug = slug;
  c.passed = true;
  for (const auto& cfg : configs) {
    ExperimentResult r = run_experiment(cfg, workers);
    c.passed = c.passed && r.passed;
    c.experiments.push_back(std::move(r));
  }
  return c;
}

// --- criterion 6: Dufresne routes --------------------------------------------

CriterionResult criterion_dufresne(std::uint64_t seed, int workers) {
  const double delta = 2.5;
  const double nu = laws::u1_nu_high(delta);
  const std::size_t n = 20000;
  std::vector<double> via_gamma(n), via_integral(n);
  const std::uint64_t sg = seed_salt(seed, "C6/gamma");
  const std::uint64_t si = seed_salt(seed, "C6/integral");
  stats::parallel_for(n, workers, [&](std::size_t i) {
    PathRng rg(sg, i);
    via_gamma[i] = laws::sample_dufresne_u1(delta, nu, rg, laws::U1Route::gamma);
    PathRng ri(si, i);
    via_integral[i] =
        laws::sample_dufresne_u1(delta, nu, ri, laws::U1Route::integral);
  });
  StatReport ks = stats::ks_two_sample(via_integral, via_gamma);
  ks.name = "dufresne_routes_ks";
  ks.seed = seed;

  double mean = 0.0;
  for (double v : via_integral) mean += v;
  mean /= static_cast<double>(n);
  StatReport m;
  m.name = "dufresne_mean";
  m.n1 = n;
  m.statistic = mean;
  m.seed = seed;
  m.criterion = "integral-route mean within 5% of 2(delta-1)/(nu-1) = 3";
  m.details.emplace_back("target", 3.0);
  m.passed = std::fabs(mean / 3.0 - 1.0) <= 0.05;

  CriterionResult c;
  c.id = 6;
  c.slug = "dufresne-identity";
  c.passed = ks.passed && m.passed;
  c.experiments.push_back(wrap("criterion_dufresne", seed, {ks, m}));
  return c;
}

// --- criterion 12: determinism -----------------------------------------------

CriterionResult criterion_determinism(std::uint64_t seed, int workers) {
  ExperimentConfig cfg = default_config("exp_scaling");
  cfg.seed = seed;
  cfg.n_paths = 2000;
  cfg.n_steps = 256;

  const std::string a = to_json(run_experiment(cfg, 1));
  const std::string b = to_json(run_experiment(cfg, 1));
  const std::string c3 = to_json(run_experiment(cfg, 3));
  const std::string cw = to_json(run_experiment(cfg, workers));

  StatReport r;
  r.name = "byte_identical_reports";
  r.n1 = 2000;
  r.seed = seed;
  r.criterion = "identical JSON across repeated runs and worker counts";
  r.statistic = (a == b && a == c3 && a == cw) ? 1.0 : 0.0;
  r.passed = r.statistic == 1.0;

  CriterionResult c;
  c.id = 12;
  c.slug = "determinism";
  c.passed = r.passed;
  c.experiments.push_back(wrap("criterion_determinism", seed, {r}));
  return c;
}

}  // namespace

std::string to_json(const CriterionResult& c) {
  nlohmann::ordered_json j;
  j["criterion"] = c.id;
  j["slug"] = c.slug;
  j["passed"] = c.passed;
  auto arr = nlohmann::ordered_json::array();
  for (const auto& e : c.experiments)
    arr.push_back(nlohmann::ordered_json::parse(to_json(e)));
  j["experiments"] = arr;
  return j.dump(2) + "\n";
}

SuiteResult run_acceptance_suite(std::uint64_t seed, int workers,
                                 const std::string& out_dir,
                                 std::ostream* log) {
  SuiteResult suite;
  auto add = [&](CriterionResult c) {
    suite.all_passed = suite.all_passed && c.passed;
    if (log) {
      std::ostringstream line;
      line << "C" << std::setw(2) << std::setfill('0') << c.id << " "
           << c.slug << ": " << (c.passed ? "PASS" : "FAIL");
      (*log) << line.str() << std::endl;
    }
    if (!out_dir.empty()) {
      std::filesystem::create_directories(out_dir);
      std::ostringstream name;
      name << out_dir << "/c" << std::setw(2) << std::setfill('0') << c.id
           << "_" << c.slug << ".json";
      write_text_file(name.str(), to_json(c));
    }
    suite.criteria.push_back(std::move(c));
  };

  add(criterion_bell(seed));
  add(criterion_dual_route(seed, workers));
  add(criterion_marginal(seed, workers));

  {  // 4: scaling across c and delta
    std::vector<ExperimentConfig> cfgs;
    for (double delta : {2.5, 3.0}) {
      for (double cc : {2.0, 10.0}) {
        ExperimentConfig cfg = default_config("exp_scaling");
        cfg.seed = seed;
        cfg.delta = delta;
        cfg.c = cc;
        cfgs.push_back(cfg);
      }
    }
    add(criterion_from_experiments(4, "scaling-law", cfgs, workers));
  }

  {  // 5: tau0 law
    ExperimentConfig cfg = default_config("exp_tau0_law");
    cfg.seed = seed;
    add(criterion_from_experiments(5, "tau0-law", {cfg}, workers));
  }

  add(criterion_dufresne(seed, workers));

  {  // 7: exponent limits
    ExperimentConfig a = default_config("exp_exponent");
    a.seed = seed;
    a.order = 2;  // reports slopes for n = 1 and n = 2
    ExperimentConfig b = default_config("exp_exponent");
    b.seed = seed;
    b.variant = "t2b";
    b.delta = 1.5;
    b.order = 1;
    b.gap_ladder = {0.1, 0.01, 0.001};
    b.n_paths = 2000;
    b.eta = 1.0 / 64.0;
    b.n_steps = 1L << 18;
    add(criterion_from_experiments(7, "exponent-limits", {a, b}, workers));
  }

  {  // 8: Spitzer-type limit at delta = 2
    ExperimentConfig cfg = default_config("exp_spitzer_delta2");
    cfg.seed = seed;
    add(criterion_from_experiments(8, "spitzer-t1-limit", {cfg}, workers));
  }

  {  // 9: U-chain ratios
    ExperimentConfig a = default_config("exp_ratio_chain");
    a.seed = seed;
    ExperimentConfig b = default_config("exp_ratio_chain");
    b.seed = seed;
    b.variant = "t2c";
    b.delta = 1.75;
    b.x = 1.0;
    b.y = 1.001;
    b.order = 2;
    b.eta = 1.0 / 64.0;
    b.n_steps = 1L << 18;
    add(criterion_from_experiments(9, "u-chain-ratio", {a, b}, workers));
  }

  {  // 10: moments
    ExperimentConfig cfg = default_config("exp_moment");
    cfg.seed = seed;
    add(criterion_from_experiments(10, "sup-ratio-moment", {cfg}, workers));
  }

  {  // 11: time reversal, modification, tau0 second-order quotient
    ExperimentConfig a = default_config("exp_time_reversal");
    a.seed = seed;
    a.q = 0.25;
    ExperimentConfig b = default_config("exp_time_reversal");
    b.seed = seed;
    b.q = 0.5;
    ExperimentConfig c = default_config("exp_modification");
    c.seed = seed;
    ExperimentConfig d = default_config("exp_tau_derivative");
    d.seed = seed;
    add(criterion_from_experiments(11, "reversal-and-modification",
                                   {a, b, c, d}, workers));
  }

  add(criterion_determinism(seed, workers));

  if (log)
    (*log) << (suite.all_passed ? "suite: ALL PASS" : "suite: FAILURES")
           << std::endl;
  return suite;
}

}  // namespace besselflow
