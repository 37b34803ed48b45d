// SPDX-License-Identifier: Apache-2.0
#include "besselflow/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace besselflow {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<double> parse_list(const std::string& v, int line) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    try {
      out.push_back(std::stod(item));
    } catch (...) {
      throw std::runtime_error("config line " + std::to_string(line) +
                               ": bad number '" + item + "'");
    }
  }
  if (out.empty())
    throw std::runtime_error("config line " + std::to_string(line) +
                             ": empty list");
  return out;
}

double parse_num(const std::string& v, int line) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument("");
    return d;
  } catch (...) {
    throw std::runtime_error("config line " + std::to_string(line) +
                             ": bad number '" + v + "'");
  }
}

[[noreturn]] void fail_rule(const std::string& rule) {
  throw std::runtime_error("config validation: " + rule);
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::stringstream ss(text);
  std::string raw;
  int line = 0;
  while (std::getline(ss, raw)) {
    ++line;
    std::string s = raw;
    const auto hash = s.find('#');
    if (hash != std::string::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(line) +
                               ": expected key = value");
    const std::string key = trim(s.substr(0, eq));
    const std::string val = trim(s.substr(eq + 1));
    if (val.empty())
      throw std::runtime_error("config line " + std::to_string(line) +
                               ": empty value for '" + key + "'");
    if (key == "experiment") {
      cfg.experiment = val;
    } else if (key == "variant") {
      cfg.variant = val;
    } else if (key == "delta") {
      cfg.delta = parse_num(val, line);
    } else if (key == "x") {
      cfg.x = parse_num(val, line);
    } else if (key == "y") {
      cfg.y = parse_num(val, line);
    } else if (key == "c") {
      cfg.c = parse_num(val, line);
    } else if (key == "t") {
      cfg.t = parse_num(val, line);
    } else if (key == "q") {
      cfg.q = parse_num(val, line);
    } else if (key == "eps") {
      cfg.eps = parse_num(val, line);
    } else if (key == "x_ladder") {
      cfg.x_ladder = parse_list(val, line);
    } else if (key == "gap_ladder") {
      cfg.gap_ladder = parse_list(val, line);
    } else if (key == "n_steps") {
      cfg.n_steps = static_cast<long>(parse_num(val, line));
    } else if (key == "n_paths") {
      cfg.n_paths = static_cast<long>(parse_num(val, line));
    } else if (key == "order") {
      cfg.order = static_cast<int>(parse_num(val, line));
    } else if (key == "gamma") {
      cfg.gamma_exp = parse_num(val, line);
    } else if (key == "eta") {
      cfg.eta = parse_num(val, line);
    } else if (key == "seed") {
      cfg.seed = static_cast<std::uint64_t>(parse_num(val, line));
      cfg.seed_set = true;
    } else if (key == "scheme") {
      if (val == "euler-floor")
        cfg.scheme = Scheme::euler_floor;
      else if (val == "implicit-drift")
        cfg.scheme = Scheme::implicit_drift;
      else
        throw std::runtime_error(
            "config line " + std::to_string(line) +
            ": scheme must be euler-floor or implicit-drift");
    } else {
      throw std::runtime_error("config line " + std::to_string(line) +
                               ": unknown key '" + key + "'");
    }
  }
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

void validate_config(const ExperimentConfig& cfg) {
  const std::string& e = cfg.experiment;
  if (e.empty()) fail_rule("experiment name is required");
  if (!cfg.seed_set && cfg.seed == 0) fail_rule("seed is required");
  if (cfg.n_paths < 1) fail_rule("n_paths must be positive");
  if (cfg.n_steps < 1) fail_rule("n_steps must be positive");

  if (e == "exp_scaling") {
    if (!(cfg.delta > 1.0)) fail_rule("exp_scaling requires delta > 1");
    if (!(cfg.c > 0.0)) fail_rule("exp_scaling requires c > 0");
  } else if (e == "exp_spitzer_delta2") {
    if (cfg.delta != 2.0) fail_rule("exp_spitzer_delta2 requires delta = 2");
    if (cfg.x_ladder.empty()) fail_rule("exp_spitzer_delta2 needs x_ladder");
  } else if (e == "exp_exponent") {
    if (cfg.variant == "t2b") {
      if (!(cfg.delta > 1.0 && cfg.delta < 2.0))
        fail_rule("exp_exponent t2b requires delta in (1,2)");
      if (cfg.gap_ladder.size() < 3)
        fail_rule("exp_exponent t2b needs a gap_ladder of >= 3 rungs");
    } else {
      if (!(cfg.delta > 2.0))
        fail_rule("exp_exponent (t11a variant) requires delta > 2");
      if (cfg.x_ladder.size() < 3)
        fail_rule("exp_exponent needs an x_ladder of >= 3 rungs");
    }
    const double nd = cfg.delta == 2.0
                          ? std::numeric_limits<double>::infinity()
                          : (cfg.delta > 2.0 ? 2.0 + 1.0 / (cfg.delta - 2.0)
                                             : 1.0 / (2.0 - cfg.delta));
    if (!(static_cast<double>(cfg.order) < nd))
      fail_rule("exp_exponent requires n < n(delta)");
  } else if (e == "exp_ratio_chain") {
    if (cfg.variant == "t2c") {
      if (!(cfg.delta > 1.0 && cfg.delta < 2.0))
        fail_rule("exp_ratio_chain t2c requires delta in (1,2)");
      if (!(5.0 - 2.0 * cfg.delta > 0.0))
        fail_rule("exp_ratio_chain t2c requires nu = 5-2delta > 0");
    } else {
      if (!(cfg.delta >= 2.0))
        fail_rule("exp_ratio_chain (t11c variant) requires delta >= 2");
      if (!(2.0 * cfg.delta - 3.0 > 0.0))
        fail_rule("exp_ratio_chain requires nu = 2delta-3 > 0");
    }
    if (cfg.order < 2) fail_rule("exp_ratio_chain requires order >= 2");
  } else if (e == "exp_moment") {
    if (!(cfg.delta > 2.0)) fail_rule("exp_moment requires delta > 2");
    const double nu = 2.0 * cfg.delta - 3.0;
    if (cfg.order < 2) fail_rule("exp_moment requires order >= 2");
    const double band = nu / static_cast<double>(cfg.order - 1);
    if (!(cfg.gamma_exp > 0.0 && cfg.gamma_exp < band))
      fail_rule("exp_moment requires 0 < gamma < nu/(n-1)");
  } else if (e == "exp_tau0_law" || e == "exp_time_reversal" ||
             e == "exp_modification" || e == "exp_tau_derivative") {
    if (!(cfg.delta > 1.0 && cfg.delta < 2.0))
      fail_rule(e + " requires delta in (1,2)");
    if (!(cfg.x > 0.0)) fail_rule(e + " requires x > 0");
    if (e == "exp_time_reversal" && !(cfg.q > 0.0 && cfg.q < 1.0))
      fail_rule("exp_time_reversal requires q in (0,1)");
    if (e == "exp_tau_derivative") {
      if (cfg.gap_ladder.size() < 2)
        fail_rule("exp_tau_derivative needs a gap_ladder of >= 2 rungs");
      for (double g : cfg.gap_ladder)
        if (!(g > 0.0)) fail_rule("exp_tau_derivative gaps must be > 0");
    }
  } else {
    fail_rule("unknown experiment '" + e + "'");
  }
}

ExperimentConfig default_config(const std::string& experiment) {
  ExperimentConfig cfg;
  cfg.experiment = experiment;
  cfg.seed = 42;
  cfg.seed_set = true;
  if (experiment == "exp_scaling") {
    cfg.delta = 2.5;
    cfg.x = 1.0;
    cfg.c = 2.0;
    cfg.t = 0.5;
    cfg.n_steps = 1024;
    cfg.n_paths = 10000;
  } else if (experiment == "exp_spitzer_delta2") {
    cfg.delta = 2.0;
    cfg.x = 1.0;
    cfg.t = 1.0;
    cfg.x_ladder = {1e-2, 1e-3, 1e-4};
    cfg.n_paths = 2500;
    cfg.eta = 1.0 / 64.0;
    cfg.n_steps = 1L << 22;  // per-path budget
  } else if (experiment == "exp_exponent") {
    cfg.variant = "t11a";
    cfg.delta = 3.0;
    cfg.t = 1.0;
    cfg.order = 1;
    cfg.x_ladder = {0.125, 0.0625, 0.03125, 0.015625, 0.0078125, 0.00390625,
                    0.001953125};
    cfg.n_paths = 512;
    cfg.eta = 1.0 / 256.0;
    cfg.n_steps = 1L << 22;
  } else if (experiment == "exp_ratio_chain") {
    cfg.variant = "t11c";
    cfg.delta = 2.5;
    cfg.order = 2;
    cfg.x = 0.0078125;  // smallest ladder point, horizon t/x^2
    cfg.t = 1.0;
    cfg.n_paths = 10000;
    cfg.eta = 1.0 / 256.0;
    cfg.n_steps = 1L << 22;
  } else if (experiment == "exp_moment") {
    cfg.delta = 2.5;
    cfg.order = 2;
    cfg.gamma_exp = 0.5;
    cfg.x = 0.0078125;
    cfg.eps = 0.1;
    cfg.t = 1.0;
    cfg.n_paths = 10000;
    cfg.eta = 1.0 / 256.0;
    cfg.n_steps = 1L << 22;
  } else if (experiment == "exp_tau0_law") {
    cfg.delta = 1.5;
    cfg.x = 1.0;
    cfg.gamma_exp = 0.25;
    cfg.n_paths = 400000;
    cfg.eta = 1.0 / 32.0;
    cfg.n_steps = 1L << 16;  // per-path budget over the adaptive horizon
  } else if (experiment == "exp_time_reversal") {
    cfg.delta = 1.5;
    cfg.x = 1.0;
    cfg.q = 0.5;
    cfg.n_paths = 5000;
    cfg.eta = 1.0 / 64.0;
    cfg.n_steps = 1L << 18;
  } else if (experiment == "exp_modification") {
    cfg.delta = 1.5;
    cfg.x = 0.5;
    cfg.t = 2.0;
    cfg.n_paths = 5000;
    cfg.eta = 1.0 / 64.0;
    cfg.n_steps = 1L << 18;
  } else if (experiment == "exp_tau_derivative") {
    cfg.delta = 1.5;
    cfg.x = 1.0;
    cfg.gap_ladder = {0.1, 0.01, 0.001};
    cfg.n_paths = 2000;
    cfg.eta = 1.0 / 64.0;
    cfg.n_steps = 1L << 18;
  } else {
    throw std::runtime_error("unknown experiment '" + experiment + "'");
  }
  return cfg;
}

std::vector<std::string> experiment_names() {
  return {"exp_scaling",     "exp_spitzer_delta2", "exp_exponent",
          "exp_ratio_chain", "exp_moment",         "exp_tau0_law",
          "exp_time_reversal", "exp_modification", "exp_tau_derivative"};
}

}  // namespace besselflow
