// Monte Carlo driver: replicate simulation, estimator battery execution,
// metric aggregation against the simulated truth, CSV emission, and
// tolerance checking. Replicates may run on several threads; outputs are
// ordered by (n, replicate, estimator position), never by completion order.
#pragma once

#include <atomic>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "ccw/config.hpp"
#include "ccw/csv.hpp"
#include "ccw/dgp.hpp"
#include "ccw/estimators.hpp"
#include "ccw/metrics.hpp"
#include "ccw/rng.hpp"

namespace ccw {

struct RawRow {
  std::string scenario;
  std::size_t n = 0;
  int replicate = 0;
  std::string estimator;
  std::optional<double> theta_months;
  std::string status;  // "ok" or sanitized error text
};

struct McResult {
  std::vector<RawRow> raw;
  std::vector<MetricsRow> metrics;
  double truth_months = 0.0;
};

namespace detail {

inline std::string sanitize_status(std::string msg) {
  for (char& c : msg)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return msg.empty() ? std::string("error") : msg;
}

}  // namespace detail

inline McResult run_monte_carlo(const RunConfig& cfg, std::ostream* log = nullptr) {
  validate_run_config(cfg);
  const Scenario sc = scenario_by_name(cfg.scenario);
  const auto estimators = resolve_estimators(cfg);
  const std::uint64_t sch = name_hash(cfg.scenario);

  McResult res;
  const double truth_years =
      oracle_rmst(sc, cfg.d1, cfg.truth_seed, cfg.truth_n_mc) -
      oracle_rmst(sc, cfg.d0, cfg.truth_seed, cfg.truth_n_mc);
  res.truth_months = truth_years * cfg.report_unit_factor;

  struct Cell {
    std::optional<double> theta;
    std::string status;
  };
  // results[size_idx][rep][estimator_idx]
  std::vector<std::vector<std::vector<Cell>>> results(
      cfg.sample_sizes.size(),
      std::vector<std::vector<Cell>>(static_cast<std::size_t>(cfg.replicates),
                                     std::vector<Cell>(estimators.size())));

  struct Task {
    std::size_t size_idx;
    int rep;
  };
  std::vector<Task> tasks;
  for (std::size_t si = 0; si < cfg.sample_sizes.size(); ++si)
    for (int r = 0; r < cfg.replicates; ++r) tasks.push_back({si, r});

  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t t = next.fetch_add(1);
      if (t >= tasks.size()) return;
      const auto [si, rep] = tasks[t];
      const std::size_t n = cfg.sample_sizes[si];
      const std::uint64_t seed_r =
          replicate_seed(cfg.seed, sch, static_cast<std::uint64_t>(n),
                         static_cast<std::uint64_t>(rep));
      const auto subjects = simulate(sc, static_cast<std::int64_t>(n), seed_r);
      for (std::size_t e = 0; e < estimators.size(); ++e) {
        Cell& cell = results[si][static_cast<std::size_t>(rep)][e];
        try {
          const ContrastEstimate est =
              run_estimator(estimators[e], sc, subjects, cfg.d1, cfg.d0);
          cell.theta = est.theta * cfg.report_unit_factor;
          cell.status = "ok";
        } catch (const std::exception& ex) {
          cell.status = detail::sanitize_status(ex.what());
        }
      }
      done.fetch_add(1);
    }
  };

  const std::size_t n_threads =
      std::min<std::size_t>(static_cast<std::size_t>(cfg.threads), tasks.size());
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < n_threads; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (log) *log << "completed " << done.load() << " replicates over "
                << cfg.sample_sizes.size() << " sample sizes\n";

  for (std::size_t si = 0; si < cfg.sample_sizes.size(); ++si) {
    for (int rep = 0; rep < cfg.replicates; ++rep) {
      for (std::size_t e = 0; e < estimators.size(); ++e) {
        const Cell& cell = results[si][static_cast<std::size_t>(rep)][e];
        RawRow row;
        row.scenario = cfg.scenario;
        row.n = cfg.sample_sizes[si];
        row.replicate = rep;
        row.estimator = estimators[e].name;
        row.theta_months = cell.theta;
        row.status = cell.status;
        res.raw.push_back(std::move(row));
      }
    }
    for (std::size_t e = 0; e < estimators.size(); ++e) {
      std::vector<double> ok;
      std::size_t failed = 0;
      for (int rep = 0; rep < cfg.replicates; ++rep) {
        const Cell& cell = results[si][static_cast<std::size_t>(rep)][e];
        if (cell.theta.has_value())
          ok.push_back(*cell.theta);
        else
          ++failed;
      }
      MetricsRow m = compute_metrics(ok, res.truth_months);
      m.scenario = cfg.scenario;
      m.n = cfg.sample_sizes[si];
      m.estimator = estimators[e].name;
      m.n_failed = failed;
      res.metrics.push_back(std::move(m));
    }
  }
  return res;
}

inline void write_raw_csv(std::ostream& os, const std::vector<RawRow>& rows) {
  os << "scenario,n,replicate,estimator,theta_months,status\n";
  for (const auto& r : rows) {
    os << r.scenario << ',' << r.n << ',' << r.replicate << ',' << r.estimator << ','
       << (r.theta_months.has_value() ? fmt_double(*r.theta_months) : std::string()) << ','
       << r.status << '\n';
  }
}

inline void write_metrics_csv(std::ostream& os, const std::vector<MetricsRow>& rows) {
  os << "scenario,n,estimator,n_reps,n_failed,truth,mean,ese,ese_defined,bias,mse,rmse\n";
  for (const auto& m : rows) {
    os << m.scenario << ',' << m.n << ',' << m.estimator << ',' << m.n_reps << ',' << m.n_failed
       << ',' << fmt_double(m.truth) << ',' << fmt_double(m.mean) << ',' << fmt_double(m.ese)
       << ',' << (m.ese_defined ? 1 : 0) << ',' << fmt_double(m.bias) << ',' << fmt_double(m.mse)
       << ',' << fmt_double(m.rmse) << '\n';
  }
}

inline void write_raw_csv(const std::string& path, const std::vector<RawRow>& rows) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  write_raw_csv(os, rows);
}

inline void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  write_metrics_csv(os, rows);
}

// Evaluate --check assertions; returns the number of violated checks.
inline int apply_checks(const RunConfig& cfg, const std::vector<MetricsRow>& metrics,
                        std::ostream& os) {
  int failures = 0;
  for (const auto& c : cfg.checks) {
    const MetricsRow* row = nullptr;
    for (const auto& m : metrics)
      if (m.estimator == c.estimator && m.n == c.n) row = &m;
    if (!row) {
      os << "check FAILED: no metrics row for estimator=" << c.estimator << " n=" << c.n << '\n';
      ++failures;
      continue;
    }
    double got = 0.0;
    if (c.metric == "mean") got = row->mean;
    else if (c.metric == "ese") got = row->ese;
    else if (c.metric == "bias") got = row->bias;
    else if (c.metric == "mse") got = row->mse;
    else if (c.metric == "rmse") got = row->rmse;
    else {
      os << "check FAILED: unknown metric '" << c.metric << "'\n";
      ++failures;
      continue;
    }
    const bool ok = std::abs(got - c.value) <= c.tol;
    os << "check " << (ok ? "ok" : "FAILED") << ": " << c.estimator << " n=" << c.n << ' '
       << c.metric << '=' << fmt_double(got) << " target " << fmt_double(c.value) << " +/- "
       << fmt_double(c.tol) << '\n';
    if (!ok) ++failures;
  }
  return failures;
}

}  // namespace ccw
