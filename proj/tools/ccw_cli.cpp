// Command-line front end: simulate datasets, run a single estimator, sweep a
// Monte Carlo grid, report simulated truths, and replay the worked toy
// examples.
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ccw/config.hpp"
#include "ccw/csv.hpp"
#include "ccw/dgp.hpp"
#include "ccw/estimators.hpp"
#include "ccw/mc.hpp"
#include "ccw/toy.hpp"

namespace {

ccw::RunConfig base_config(const std::string& config_path) {
  if (config_path.empty()) return ccw::RunConfig{};
  return ccw::load_run_config(config_path);
}

void ensure_dir(const std::string& dir) {
  if (!dir.empty() && dir != ".") std::filesystem::create_directories(dir);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cloning-censoring-weighting toolkit for treatment-duration contrasts"};
  app.require_subcommand(1);

  std::string config_path, scenario, out_dir, estimator_name, in_file, convention;
  std::size_t n_subjects = 1000;
  int replicates = -1, d1 = -1, d0 = -1, threads = -1;
  std::int64_t n_mc = -1;
  std::uint64_t seed = 0;
  bool seed_set = false, check = false, survival = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON run configuration");
    cmd->add_option_function<std::uint64_t>(
        "--seed", [&](std::uint64_t s) { seed = s; seed_set = true; }, "master seed override");
    cmd->add_option("--out", out_dir, "output directory");
  };

  CLI::App* sim = app.add_subcommand("simulate", "simulate one observed-data cohort to CSV");
  add_common(sim);
  sim->add_option("--scenario", scenario, "scenario name");
  sim->add_option("--n", n_subjects, "number of subjects");

  CLI::App* est = app.add_subcommand("estimate", "run one estimator on one cohort");
  add_common(est);
  est->add_option("--scenario", scenario, "scenario name");
  est->add_option("--estimator", estimator_name, "estimator name")->required();
  est->add_option("--in", in_file, "dataset CSV (default: simulate internally)");
  est->add_option("--n", n_subjects, "subjects when simulating internally");
  est->add_option("--d1", d1, "longer strategy duration");
  est->add_option("--d0", d0, "shorter strategy duration");
  est->add_option("--convention", convention, "deviation convention: at_visit | end_of_interval");
  est->add_flag("--survival", survival, "write survival_d<arm>.csv curves when available");

  CLI::App* mc = app.add_subcommand("mc-run", "Monte Carlo sweep over sample sizes");
  add_common(mc);
  mc->add_option("--scenario", scenario, "scenario name");
  mc->add_option("--replicates", replicates, "replicates per sample size");
  mc->add_option("--threads", threads, "worker threads");
  mc->add_flag("--check", check, "evaluate configured tolerance checks; nonzero exit on breach");

  CLI::App* orc = app.add_subcommand("oracle", "simulated truth for a strategy contrast");
  add_common(orc);
  orc->add_option("--scenario", scenario, "scenario name");
  orc->add_option("--d1", d1, "longer strategy duration");
  orc->add_option("--d0", d0, "shorter strategy duration");
  orc->add_option("--n-mc", n_mc, "forced-strategy simulation size");

  CLI::App* toy = app.add_subcommand("toy", "replay the worked toy examples and verify them");
  (void)toy;

  CLI11_PARSE(app, argc, argv);

  try {
    ccw::RunConfig cfg = base_config(config_path);
    if (!scenario.empty()) cfg.scenario = scenario;
    if (seed_set) cfg.seed = seed;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (replicates > 0) cfg.replicates = replicates;
    if (threads > 0) cfg.threads = threads;
    if (d1 > 0) cfg.d1 = d1;
    if (d0 > 0) cfg.d0 = d0;
    if (n_mc > 0) cfg.truth_n_mc = n_mc;
    if (!convention.empty()) cfg.convention = convention;
    ccw::validate_run_config(cfg);
    const ccw::Scenario sc = ccw::scenario_by_name(cfg.scenario);

    if (*sim) {
      ensure_dir(cfg.out_dir);
      const auto subjects =
          ccw::simulate(sc, static_cast<std::int64_t>(n_subjects), cfg.seed);
      const std::string path = cfg.out_dir + "/dataset.csv";
      ccw::write_subjects_csv(path, subjects, sc.grid.K());
      std::cout << "wrote " << subjects.size() << " subjects to " << path << '\n';
      return 0;
    }

    if (*est) {
      std::vector<ccw::SubjectRecord> subjects;
      if (!in_file.empty()) {
        subjects = ccw::read_subjects_csv(in_file);
      } else {
        subjects = ccw::simulate(sc, static_cast<std::int64_t>(n_subjects), cfg.seed);
      }
      ccw::EstimatorConfig ec = ccw::estimator_preset(estimator_name, sc.kind);
      ec.convention = ccw::parse_convention(cfg.convention);
      ec.censor.truncate = cfg.truncate_weights;
      ec.m_draws = cfg.m_draws;
      ccw::SurvivalExport curves;
      const ccw::ContrastEstimate res =
          ccw::run_estimator(ec, sc, subjects, cfg.d1, cfg.d0, &curves);
      const double f = cfg.report_unit_factor;
      std::cout << "estimator: " << res.label << '\n'
                << "rmst_d" << res.d1 << ": " << ccw::fmt_double(res.rmst_d1 * f) << '\n'
                << "rmst_d" << res.d0 << ": " << ccw::fmt_double(res.rmst_d0 * f) << '\n'
                << "theta: " << ccw::fmt_double(res.theta * f) << '\n';
      if (survival || cfg.write_survival) {
        if (!curves.available) {
          std::cerr << "estimator '" << estimator_name << "' does not produce survival curves\n";
          return 1;
        }
        ensure_dir(cfg.out_dir);
        ccw::write_survival_csv(cfg.out_dir + "/survival_d" + std::to_string(res.d1) + ".csv",
                                curves.d1);
        ccw::write_survival_csv(cfg.out_dir + "/survival_d" + std::to_string(res.d0) + ".csv",
                                curves.d0);
      }
      return 0;
    }

    if (*mc) {
      ensure_dir(cfg.out_dir);
      const ccw::McResult res = ccw::run_monte_carlo(cfg, &std::cerr);
      ccw::write_raw_csv(cfg.out_dir + "/raw.csv", res.raw);
      ccw::write_metrics_csv(cfg.out_dir + "/metrics.csv", res.metrics);
      std::cout << "truth (report units): " << ccw::fmt_double(res.truth_months) << '\n';
      ccw::write_metrics_csv(std::cout, res.metrics);
      if (check) {
        const int failures = ccw::apply_checks(cfg, res.metrics, std::cout);
        if (failures > 0) {
          std::cout << failures << " check(s) failed\n";
          return 1;
        }
      }
      return 0;
    }

    if (*orc) {
      const double r1 = ccw::oracle_rmst(sc, cfg.d1, cfg.truth_seed, cfg.truth_n_mc);
      const double r0 = ccw::oracle_rmst(sc, cfg.d0, cfg.truth_seed, cfg.truth_n_mc);
      const double f = cfg.report_unit_factor;
      std::cout << "rmst_d" << cfg.d1 << ": " << ccw::fmt_double(r1 * f) << '\n'
                << "rmst_d" << cfg.d0 << ": " << ccw::fmt_double(r0 * f) << '\n'
                << "theta: " << ccw::fmt_double((r1 - r0) * f) << '\n';
      return 0;
    }

    if (*toy) return ccw::toy_report(std::cout) ? 0 : 1;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 1;
  }
  return 0;
}
