// Run configuration: JSON document controlling scenario, grid of sample
// sizes, replicates, estimator battery, strategy contrast, seeding, units,
// output locations, and optional tolerance checks.
#pragma once

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ccw/clone.hpp"
#include "ccw/dgp.hpp"
#include "ccw/estimators.hpp"

namespace ccw {

// One tolerance assertion evaluated against the metrics table by --check.
struct CheckSpec {
  std::string estimator;
  std::size_t n = 0;
  std::string metric;  // mean | ese | bias | mse | rmse
  double value = 0.0;
  double tol = 0.0;
};

struct RunConfig {
  std::string scenario = "baseline-s4";
  std::vector<std::size_t> sample_sizes = {500, 1000, 2000, 4000, 8000};
  int replicates = 50;
  std::vector<std::string> estimators;  // empty: scenario's default battery
  int d1 = 5;
  int d0 = 3;
  std::uint64_t seed = 12345;
  double report_unit_factor = 12.0;  // internal years -> reported months
  std::string out_dir = ".";
  std::string convention = "at_visit";  // deviation convention for cloning
  bool truncate_weights = false;
  int m_draws = 1;
  std::uint64_t truth_seed = 4242;
  std::int64_t truth_n_mc = 2'000'000;
  int threads = 1;
  bool write_survival = false;
  std::vector<CheckSpec> checks;
};

inline DeviationConvention parse_convention(const std::string& s) {
  if (s == "at_visit") return DeviationConvention::at_visit;
  if (s == "end_of_interval") return DeviationConvention::end_of_interval;
  throw std::invalid_argument("unknown deviation convention: " + s);
}

inline void validate_run_config(const RunConfig& cfg) {
  const Scenario sc = scenario_by_name(cfg.scenario);  // throws on unknown name
  const int dmax = sc.grid.K() + 1;
  if (cfg.replicates < 1) throw std::invalid_argument("replicates must be >= 1");
  if (cfg.d1 < 1 || cfg.d1 > dmax || cfg.d0 < 1 || cfg.d0 > dmax)
    throw std::invalid_argument("strategy durations must lie in [1, K+1]");
  if (cfg.sample_sizes.empty()) throw std::invalid_argument("sample_sizes must be non-empty");
  for (std::size_t n : cfg.sample_sizes)
    if (n == 0) throw std::invalid_argument("sample sizes must be positive");
  if (cfg.report_unit_factor <= 0) throw std::invalid_argument("report unit factor must be > 0");
  if (cfg.m_draws < 1) throw std::invalid_argument("m_draws must be >= 1");
  if (cfg.threads < 1) throw std::invalid_argument("threads must be >= 1");
  parse_convention(cfg.convention);
  for (const auto& name : cfg.estimators) estimator_preset(name, sc.kind);  // throws on unknown
}

inline RunConfig parse_run_config(const nlohmann::json& j) {
  RunConfig cfg;
  cfg.scenario = j.value("scenario", cfg.scenario);
  if (j.contains("sample_sizes")) cfg.sample_sizes = j.at("sample_sizes").get<std::vector<std::size_t>>();
  cfg.replicates = j.value("replicates", cfg.replicates);
  if (j.contains("estimators")) cfg.estimators = j.at("estimators").get<std::vector<std::string>>();
  cfg.d1 = j.value("d1", cfg.d1);
  cfg.d0 = j.value("d0", cfg.d0);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.report_unit_factor = j.value("report_unit_factor", cfg.report_unit_factor);
  cfg.out_dir = j.value("out", cfg.out_dir);
  cfg.convention = j.value("convention", cfg.convention);
  cfg.truncate_weights = j.value("truncate_weights", cfg.truncate_weights);
  cfg.m_draws = j.value("m_draws", cfg.m_draws);
  cfg.truth_seed = j.value("truth_seed", cfg.truth_seed);
  cfg.truth_n_mc = j.value("truth_n_mc", cfg.truth_n_mc);
  cfg.threads = j.value("threads", cfg.threads);
  cfg.write_survival = j.value("write_survival", cfg.write_survival);
  if (j.contains("checks")) {
    for (const auto& cj : j.at("checks")) {
      CheckSpec c;
      c.estimator = cj.at("estimator").get<std::string>();
      c.n = cj.at("n").get<std::size_t>();
      c.metric = cj.at("metric").get<std::string>();
      c.value = cj.at("value").get<double>();
      c.tol = cj.at("tol").get<double>();
      cfg.checks.push_back(c);
    }
  }
  validate_run_config(cfg);
  return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  nlohmann::json j;
  in >> j;
  return parse_run_config(j);
}

// Estimator list with config-level knobs applied.
inline std::vector<EstimatorConfig> resolve_estimators(const RunConfig& cfg) {
  const Scenario sc = scenario_by_name(cfg.scenario);
  const auto names = cfg.estimators.empty() ? default_battery(sc.kind) : cfg.estimators;
  std::vector<EstimatorConfig> out;
  for (const auto& name : names) {
    EstimatorConfig ec = estimator_preset(name, sc.kind);
    ec.convention = parse_convention(cfg.convention);
    ec.censor.truncate = cfg.truncate_weights;
    ec.m_draws = cfg.m_draws;
    out.push_back(ec);
  }
  return out;
}

}  // namespace ccw
