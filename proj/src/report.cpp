// SPDX-License-Identifier: Apache-2.0
#include "besselflow/report.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace besselflow {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json report_json(const stats::StatReport& r) {
  ordered_json j;
  j["name"] = r.name;
  j["n1"] = r.n1;
  if (r.n2 > 0) j["n2"] = r.n2;
  j["statistic"] = r.statistic;
  if (r.p_value) j["p_value"] = *r.p_value;
  if (r.ci) j["ci"] = {r.ci->first, r.ci->second};
  j["criterion"] = r.criterion;
  j["passed"] = r.passed;
  j["seed"] = r.seed;
  if (!r.details.empty()) {
    ordered_json d;
    for (const auto& [k, v] : r.details) d[k] = v;
    j["details"] = d;
  }
  if (!r.flags.empty()) j["flags"] = r.flags;
  return j;
}

ordered_json config_json(const ExperimentConfig& c) {
  ordered_json j;
  j["experiment"] = c.experiment;
  if (!c.variant.empty()) j["variant"] = c.variant;
  j["delta"] = c.delta;
  j["x"] = c.x;
  if (c.y != 0.0) j["y"] = c.y;
  j["c"] = c.c;
  j["t"] = c.t;
  j["q"] = c.q;
  j["eps"] = c.eps;
  if (!c.x_ladder.empty()) j["x_ladder"] = c.x_ladder;
  if (!c.gap_ladder.empty()) j["gap_ladder"] = c.gap_ladder;
  j["n_steps"] = c.n_steps;
  j["n_paths"] = c.n_paths;
  j["order"] = c.order;
  j["gamma"] = c.gamma_exp;
  j["eta"] = c.eta;
  j["seed"] = c.seed;
  j["scheme"] =
      c.scheme == Scheme::euler_floor ? "euler-floor" : "implicit-drift";
  return j;
}

}  // namespace

std::string to_json(const stats::StatReport& report) {
  return report_json(report).dump(2) + "\n";
}

std::string to_json(const ExperimentResult& result) {
  ordered_json j;
  j["schema_version"] = 1;
  j["experiment"] = result.experiment;
  j["config"] = config_json(result.config);
  j["passed"] = result.passed;
  ordered_json reports = ordered_json::array();
  for (const auto& r : result.reports) reports.push_back(report_json(r));
  j["reports"] = reports;
  return j.dump(2) + "\n";
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << content;
}

void write_paths_csv(const std::string& path,
                     const std::vector<std::vector<double>>& values,
                     const std::vector<double>& times) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << "path_id,t,value\n";
  char buf[64];
  for (std::size_t p = 0; p < values.size(); ++p) {
    if (values[p].size() != times.size())
      throw std::invalid_argument("write_paths_csv: node count mismatch");
    for (std::size_t k = 0; k < times.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", p, times[k],
                    values[p][k]);
      out << buf;
    }
  }
}

void write_draws_csv(const std::string& path,
                     const std::vector<double>& draws) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << "index,value\n";
  char buf[48];
  for (std::size_t i = 0; i < draws.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i, draws[i]);
    out << buf;
  }
}

}  // namespace besselflow
