// The full battery of RMST-contrast estimators: naive filtered comparisons,
// filtered and cloned G-formulas (piecewise-exponential and Weibull),
// unweighted and IPCW-weighted Kaplan-Meier on cloned data, oracle-weight
// IPCW, the augmented (doubly robust) IPCW transformation, and the
// trajectory-reconstruction G-formula for time-varying covariates.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ccw/clone.hpp"
#include "ccw/core.hpp"
#include "ccw/dgp.hpp"
#include "ccw/glm.hpp"
#include "ccw/hazard.hpp"
#include "ccw/km.hpp"
#include "ccw/panel.hpp"
#include "ccw/rng.hpp"
#include "ccw/weights.hpp"

namespace ccw {

struct EstimatorConfig {
  std::string name;                       // output label
  std::string kind;                       // dispatch key
  CensorModelConfig censor;               // ipcw variants
  std::vector<std::string> outcome_covs;  // G-formula / AIPCW outcome model
  std::string q_source = "fitted";        // aipcw: fitted | true_dgp | tau
  std::string w_source = "fitted";        // aipcw: fitted | unit
  DeviationConvention convention = DeviationConvention::at_visit;
  int m_draws = 1;                        // trajectory imputation draws (1 = deterministic)
  std::uint64_t draw_seed = 99;
};

struct SurvivalExport {
  StepSurvival d1, d0;
  bool available = false;
};

namespace detail {

inline bool prefix_compatible(const SubjectRecord& s, const Strategy& g, int K) {
  const int last = std::min<int>(K, static_cast<int>(s.A.size()) - 1);
  for (int k = 0; k <= last; ++k)
    if (s.A[k].has_value() && *s.A[k] != static_cast<double>(g.indicator(k))) return false;
  return true;
}

inline std::vector<CloneRecord> pseudo_clones_filtered(const std::vector<SubjectRecord>& subjects,
                                                       const Strategy& g, const VisitGrid& grid) {
  // Uncloned follow-up of strategy-compatible subjects: no artificial censoring.
  std::vector<CloneRecord> out;
  for (std::size_t i = 0; i < subjects.size(); ++i) {
    const SubjectRecord& s = subjects[i];
    if (!prefix_compatible(s, g, grid.K())) continue;
    CloneRecord c;
    c.subject_index = static_cast<std::int64_t>(i);
    c.strategy = g;
    c.G = kInf;
    c.T_tilde_d = s.T_tilde;
    c.delta_d = s.event;
    c.naturally_censored = s.event == 0 && s.T_tilde < grid.tau;
    out.push_back(c);
  }
  return out;
}

inline std::vector<double> subject_covs(const SubjectRecord& s,
                                        const std::vector<std::string>& names, int j) {
  std::vector<double> v;
  v.reserve(names.size());
  for (const auto& n : names) v.push_back(covariate_value(s, n, j));
  return v;
}

// Mean closed-form RMST over the whole cohort under a fitted hazard model
// whose covariates are constant over intervals (baseline covariates).
inline double standardized_pwexp_rmst(const PwexpFit& fit,
                                      const std::vector<SubjectRecord>& subjects,
                                      const std::vector<std::string>& covs,
                                      const VisitGrid& grid) {
  double acc = 0.0;
  for (const auto& s : subjects)
    acc += pwexp_rmst(fit.rate_schedule(subject_covs(s, covs, 1)), grid);
  return acc / static_cast<double>(subjects.size());
}

}  // namespace detail

// --- naive filtered comparison ------------------------------------------------

inline ContrastEstimate naive_filtered(const std::vector<SubjectRecord>& subjects, int d1, int d0,
                                       const VisitGrid& grid) {
  auto arm_mean = [&](int d) {
    const Strategy g(d, grid.K());
    double acc = 0.0;
    std::size_t m = 0;
    for (const auto& s : subjects)
      if (detail::prefix_compatible(s, g, grid.K())) {
        acc += std::min(s.T_tilde, grid.tau);
        ++m;
      }
    if (m == 0) throw EstimationError("no subjects compatible with the strategy");
    return acc / static_cast<double>(m);
  };
  ContrastEstimate est;
  est.d1 = d1;
  est.d0 = d0;
  est.rmst_d1 = arm_mean(d1);
  est.rmst_d0 = arm_mean(d0);
  est.theta = est.rmst_d1 - est.rmst_d0;
  return est;
}

// --- filtered (uncloned) G-formula ---------------------------------------------

inline ContrastEstimate gformula_filtered(const std::vector<SubjectRecord>& subjects, int d1,
                                          int d0, const std::vector<std::string>& covs,
                                          const VisitGrid& grid) {
  auto arm_rmst = [&](int d) {
    const auto clones = detail::pseudo_clones_filtered(subjects, Strategy(d, grid.K()), grid);
    if (clones.empty()) throw EstimationError("no subjects compatible with the strategy");
    const auto rows = expand_visits(clones, subjects, grid, CovariateSpec{covs});
    const auto fit = fit_pwexp(rows, grid.n_intervals(),
                               [](const PersonPeriodRow& r) { return r.y; }, PwexpRole::outcome);
    return detail::standardized_pwexp_rmst(fit, subjects, covs, grid);
  };
  ContrastEstimate est;
  est.d1 = d1;
  est.d0 = d0;
  est.rmst_d1 = arm_rmst(d1);
  est.rmst_d0 = arm_rmst(d0);
  est.theta = est.rmst_d1 - est.rmst_d0;
  return est;
}

// --- KM-based estimators on cloned data ----------------------------------------

inline ContrastEstimate km_contrast_from_trajectories(
    const std::vector<CloneRecord>& arm1, const std::vector<WeightTrajectory>& w1,
    const std::vector<CloneRecord>& arm0, const std::vector<WeightTrajectory>& w0,
    int d1, int d0, const VisitGrid& grid, SurvivalExport* curves = nullptr) {
  const StepSurvival s1 = weighted_km_clones(arm1, w1, grid);
  const StepSurvival s0 = weighted_km_clones(arm0, w0, grid);
  if (curves) {
    curves->d1 = s1;
    curves->d0 = s0;
    curves->available = true;
  }
  ContrastEstimate est;
  est.d1 = d1;
  est.d0 = d0;
  est.rmst_d1 = rmst(s1, grid.tau);
  est.rmst_d0 = rmst(s0, grid.tau);
  est.theta = est.rmst_d1 - est.rmst_d0;
  return est;
}

inline ContrastEstimate km_cloned(const std::vector<SubjectRecord>& subjects, int d1, int d0,
                                  DeviationConvention conv, const VisitGrid& grid,
                                  SurvivalExport* curves = nullptr) {
  const auto arm1 = clone_arm(subjects, Strategy(d1, grid.K()), conv, grid);
  const auto arm0 = clone_arm(subjects, Strategy(d0, grid.K()), conv, grid);
  const std::vector<WeightTrajectory> w1(arm1.size(), unit_trajectory(grid));
  const std::vector<WeightTrajectory> w0(arm0.size(), unit_trajectory(grid));
  return km_contrast_from_trajectories(arm1, w1, arm0, w0, d1, d0, grid, curves);
}

inline ContrastEstimate ipcw_km_contrast(const std::vector<SubjectRecord>& subjects, int d1,
                                         int d0, const CensorModelConfig& cfg,
                                         DeviationConvention conv, const VisitGrid& grid,
                                         SurvivalExport* curves = nullptr) {
  // union covariate list preserving first-seen order
  std::vector<std::string> universe;
  for (const auto& lists : {cfg.art_covs, cfg.nat_covs})
    for (const auto& n : lists)
      if (std::find(universe.begin(), universe.end(), n) == universe.end()) universe.push_back(n);

  auto build = [&](int d, std::vector<CloneRecord>& clones, std::vector<WeightTrajectory>& w) {
    clones = clone_arm(subjects, Strategy(d, grid.K()), conv, grid);
    const auto rows = expand_visits(clones, subjects, grid, CovariateSpec{universe});
    w = fitted_trajectories(rows, clones.size(), universe, cfg, grid);
  };
  std::vector<CloneRecord> arm1, arm0;
  std::vector<WeightTrajectory> w1, w0;
  build(d1, arm1, w1);
  build(d0, arm0, w0);
  return km_contrast_from_trajectories(arm1, w1, arm0, w0, d1, d0, grid, curves);
}

inline ContrastEstimate ipcw_true_weights(const std::vector<SubjectRecord>& subjects, int d1,
                                          int d0, const BaselineParams& params,
                                          DeviationConvention conv, const VisitGrid& grid,
                                          SurvivalExport* curves = nullptr) {
  const auto arm1 = clone_arm(subjects, Strategy(d1, grid.K()), conv, grid);
  const auto arm0 = clone_arm(subjects, Strategy(d0, grid.K()), conv, grid);
  const auto w1 = true_baseline_trajectories(subjects, arm1, params, conv, grid);
  const auto w0 = true_baseline_trajectories(subjects, arm0, params, conv, grid);
  return km_contrast_from_trajectories(arm1, w1, arm0, w0, d1, d0, grid, curves);
}

// --- cloned G-formula (baseline covariates) -------------------------------------

inline ContrastEstimate gformula_baseline_pwexp(const std::vector<SubjectRecord>& subjects, int d1,
                                                int d0, const std::vector<std::string>& covs,
                                                DeviationConvention conv, const VisitGrid& grid) {
  auto arm_rmst = [&](int d) {
    const auto clones = clone_arm(subjects, Strategy(d, grid.K()), conv, grid);
    const auto rows = expand_visits(clones, subjects, grid, CovariateSpec{covs});
    const auto fit = fit_pwexp(rows, grid.n_intervals(),
                               [](const PersonPeriodRow& r) { return r.y; }, PwexpRole::outcome);
    return detail::standardized_pwexp_rmst(fit, subjects, covs, grid);
  };
  ContrastEstimate est;
  est.d1 = d1;
  est.d0 = d0;
  est.rmst_d1 = arm_rmst(d1);
  est.rmst_d0 = arm_rmst(d0);
  est.theta = est.rmst_d1 - est.rmst_d0;
  return est;
}

inline ContrastEstimate gformula_baseline_weibull(const std::vector<SubjectRecord>& subjects,
                                                  int d1, int d0,
                                                  const std::vector<std::string>& covs,
                                                  DeviationConvention conv,
                                                  const VisitGrid& grid) {
  auto arm_rmst = [&](int d) {
    const auto clones = clone_arm(subjects, Strategy(d, grid.K()), conv, grid);
    std::vector<double> times;
    std::vector<int> events;
    std::vector<std::vector<double>> X;
    for (const auto& c : clones) {
      times.push_back(c.T_tilde_d);
      events.push_back(c.delta_d);
      X.push_back(detail::subject_covs(subjects[static_cast<std::size_t>(c.subject_index)], covs, 1));
    }
    const WeibullFit fit = fit_weibull(times, events, X);
    double acc = 0.0;
    for (const auto& s : subjects)
      acc += weibull_rmst(fit, detail::subject_covs(s, covs, 1), grid.tau);
    return acc / static_cast<double>(subjects.size());
  };
  ContrastEstimate est;
  est.d1 = d1;
  est.d0 = d0;
  est.rmst_d1 = arm_rmst(d1);
  est.rmst_d0 = arm_rmst(d0);
  est.theta = est.rmst_d1 - est.rmst_d0;
  return est;
}

// --- residual life and AIPCW -----------------------------------------------------

// Q(t|x) = t + integral_t^tau S(u|x) du / S(t|x) under a piecewise-constant
// hazard schedule; Q(tau) = tau.
inline double q_residual(const std::vector<double>& hazard_schedule, const VisitGrid& grid,
                         double t) {
  return pwexp_Q(hazard_schedule, grid, t);
}

// True event-hazard schedule for a subject forced onto strategy g.
inline std::vector<double> true_event_schedule(const SubjectRecord& s, const BaselineParams& p,
                                               const Strategy& g, const VisitGrid& grid) {
  const int J = grid.n_intervals();
  const int K = grid.K();
  std::vector<double> lam(static_cast<std::size_t>(J));
  for (int j = 1; j <= J; ++j) {
    const int k = j - 1;
    const double at = (k <= 2) ? p.at_pre : p.at_post;
    lam[static_cast<std::size_t>(j - 1)] =
        std::exp(p.a0 + p.aA * g.indicator(std::min(k, K)) + p.aX1 * s.X1 + p.aX2 * s.X2 +
                 p.aX3 * s.X3 + at);
  }
  return lam;
}

// Doubly robust transformation: T_DR = Delta*(T^~ ^ tau)*W(T^~)
//   + (1-Delta)*Q(T^~ ^ tau | x)*W(T^~ ^ tau)
//   - integral_0^{T^~ ^ tau} W(t)*Q(t|x)*lam_H(t|x) dt,
// with lam_H the total (artificial + natural) censoring intensity. The
// discrete per-interval deviation probability p is smeared over its interval
// as lam = -log(1-p)/len, and the SAME intensity drives both the weight
// W(t) = exp(integral_0^t lam_H) and the augmentation compensator, so the
// boundary values of W match the discrete stay-product exactly.
inline ContrastEstimate aipcw_contrast(const std::vector<SubjectRecord>& subjects, int d1, int d0,
                                       const Scenario& sc, const EstimatorConfig& cfg,
                                       const VisitGrid& grid) {
  if (sc.kind != Scenario::Kind::baseline)
    throw EstimationError("augmented IPCW is provided for the baseline-covariate setting only");
  const auto& gl = gauss_legendre(16);
  const int J = grid.n_intervals();

  auto arm_mean = [&](int d) {
    const Strategy g(d, grid.K());
    const auto clones = clone_arm(subjects, g, cfg.convention, grid);
    std::vector<std::string> universe;
    for (const auto& lists : {cfg.censor.art_covs, cfg.censor.nat_covs, cfg.outcome_covs})
      for (const auto& n : lists)
        if (std::find(universe.begin(), universe.end(), n) == universe.end()) universe.push_back(n);
    const auto rows = expand_visits(clones, subjects, grid, CovariateSpec{universe});

    // censoring intensity per clone per interval
    std::vector<std::vector<double>> lamH(clones.size(),
                                          std::vector<double>(static_cast<std::size_t>(J), 0.0));
    if (cfg.w_source == "fitted") {
      const auto traj = fitted_trajectories(rows, clones.size(), universe, cfg.censor, grid);
      for (std::size_t c = 0; c < clones.size(); ++c)
        for (int j = 1; j <= J; ++j) {
          const std::size_t jj = static_cast<std::size_t>(j - 1);
          const double ps = std::max(traj[c].p_stay_art[jj], 1e-12);
          lamH[c][jj] = -std::log(ps) / grid.interval_length(j) + traj[c].lam_nat[jj];
        }
    } else if (cfg.w_source != "unit") {
      throw std::invalid_argument("unknown weight source: " + cfg.w_source);
    }

    // residual-life model per clone
    std::vector<std::vector<double>> lamQ;
    if (cfg.q_source == "fitted") {
      const auto ofit = fit_pwexp(rows, J, [](const PersonPeriodRow& r) { return r.y; },
                                  PwexpRole::outcome);
      lamQ.resize(clones.size());
      for (std::size_t c = 0; c < clones.size(); ++c)
        lamQ[c] = ofit.rate_schedule(detail::subject_covs(
            subjects[static_cast<std::size_t>(clones[c].subject_index)], cfg.outcome_covs, 1));
    } else if (cfg.q_source == "true_dgp") {
      lamQ.resize(clones.size());
      for (std::size_t c = 0; c < clones.size(); ++c)
        lamQ[c] = true_event_schedule(subjects[static_cast<std::size_t>(clones[c].subject_index)],
                                      sc.base, g, grid);
    } else if (cfg.q_source != "tau") {
      throw std::invalid_argument("unknown residual-life source: " + cfg.q_source);
    }

    auto Q = [&](std::size_t c, double t) {
      return cfg.q_source == "tau" ? grid.tau : pwexp_Q(lamQ[c], grid, t);
    };

    double acc = 0.0;
    for (std::size_t c = 0; c < clones.size(); ++c) {
      const CloneRecord& cl = clones[c];
      const double Td = std::min(cl.T_tilde_d, grid.tau);
      // cumulative log-weight at interval starts under the smeared intensity
      std::vector<double> logw(static_cast<std::size_t>(J), 0.0);
      for (int j = 2; j <= J; ++j)
        logw[static_cast<std::size_t>(j - 1)] =
            logw[static_cast<std::size_t>(j - 2)] +
            lamH[c][static_cast<std::size_t>(j - 2)] * grid.interval_length(j - 1);
      auto W = [&](double t) {
        const int j = grid.interval_of(t);
        const std::size_t jj = static_cast<std::size_t>(j - 1);
        return std::exp(logw[jj] + lamH[c][jj] * (t - grid.bound(j - 1)));
      };

      const double Wend = W(Td);
      double tdr = cl.delta_d == 1 ? Td * Wend : Q(c, Td) * Wend;
      for (int j = 1; j <= J; ++j) {
        const double a = grid.bound(j - 1);
        if (Td <= a) break;
        const double lh = lamH[c][static_cast<std::size_t>(j - 1)];
        if (lh == 0.0) continue;
        const double b = std::min(grid.bound(j), Td);
        const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
        double integral = 0.0;
        for (std::size_t qn = 0; qn < gl.first.size(); ++qn) {
          const double t = mid + half * gl.first[qn];
          integral += gl.second[qn] * W(t) * Q(c, t);
        }
        tdr -= lh * half * integral;
      }
      acc += tdr;
    }
    return acc / static_cast<double>(clones.size());
  };

  ContrastEstimate est;
  est.d1 = d1;
  est.d0 = d0;
  est.rmst_d1 = arm_mean(d1);
  est.rmst_d0 = arm_mean(d0);
  est.theta = est.rmst_d1 - est.rmst_d0;
  return est;
}

// --- trajectory-reconstruction G-formula (time-varying covariates) ---------------

// Pooled linear-Gaussian transition models fitted over all observed
// consecutive visit pairs: X3' ~ 1 + X3 + A, X4' ~ 1 + X4.
struct TransitionFit {
  std::vector<double> b3;  // intercept, X3_prev, A_prev
  std::vector<double> b4;  // intercept, X4_prev
  double sd3 = 0.0, sd4 = 0.0;
};

namespace detail {

inline std::vector<double> ols(const std::vector<std::vector<double>>& X,
                               const std::vector<double>& y) {
  const std::size_t n = X.size(), p = X.front().size();
  std::vector<double> A(p * p, 0.0), b(p, 0.0), beta;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < p; ++a) {
      b[a] += X[i][a] * y[i];
      for (std::size_t c = a; c < p; ++c) A[a * p + c] += X[i][a] * X[i][c];
    }
  }
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t c = 0; c < a; ++c) A[a * p + c] = A[c * p + a];
  if (!linalg::cholesky_solve(A, b, p, 1e-10, beta))
    throw EstimationError("transition model is rank-deficient");
  return beta;
}

inline double residual_sd(const std::vector<std::vector<double>>& X, const std::vector<double>& y,
                          const std::vector<double>& beta) {
  double ss = 0.0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    double fit = 0.0;
    for (std::size_t k = 0; k < beta.size(); ++k) fit += X[i][k] * beta[k];
    ss += (y[i] - fit) * (y[i] - fit);
  }
  return std::sqrt(ss / static_cast<double>(X.size()));
}

}  // namespace detail

inline TransitionFit fit_transitions(const std::vector<SubjectRecord>& subjects,
                                     const VisitGrid& grid) {
  const int K = grid.K();
  std::vector<std::vector<double>> X3rows, X4rows;
  std::vector<double> y3, y4;
  for (const auto& s : subjects) {
    for (int k = 0; k + 1 <= K; ++k) {
      const auto& x3 = s.X3k;
      const auto& x4 = s.X4k;
      const std::size_t kk = static_cast<std::size_t>(k);
      if (x3[kk].has_value() && x3[kk + 1].has_value() && s.A[kk].has_value()) {
        X3rows.push_back({1.0, *x3[kk], *s.A[kk]});
        y3.push_back(*x3[kk + 1]);
      }
      if (x4[kk].has_value() && x4[kk + 1].has_value()) {
        X4rows.push_back({1.0, *x4[kk]});
        y4.push_back(*x4[kk + 1]);
      }
    }
  }
  if (X3rows.empty() || X4rows.empty())
    throw EstimationError("no observed transitions to fit");
  TransitionFit fit;
  fit.b3 = detail::ols(X3rows, y3);
  fit.b4 = detail::ols(X4rows, y4);
  fit.sd3 = detail::residual_sd(X3rows, y3, fit.b3);
  fit.sd4 = detail::residual_sd(X4rows, y4, fit.b4);
  return fit;
}

// Complete a clone's covariate history under its strategy: keep values from
// attended visits not later than min(T^~, G), impute every later or missing
// value sequentially from transition models with treatment pinned to the
// rule. Callbacks receive (x3_prev, x4_prev, a_prev, k) and return the
// imputed value for visit k.
template <class F3, class F4>
inline void complete_trajectory_with(const SubjectRecord& s, const CloneRecord& cl,
                                     const VisitGrid& grid, const F3& f3, const F4& f4,
                                     std::vector<double>& x3c, std::vector<double>& x4c) {
  const int K = grid.K();
  const double lim = std::min(s.T_tilde, cl.G);
  x3c.assign(static_cast<std::size_t>(K + 1), 0.0);
  x4c.assign(static_cast<std::size_t>(K + 1), 0.0);
  x3c[0] = s.X3k[0].value_or(0.0);
  x4c[0] = s.X4k[0].value_or(0.0);
  for (int k = 1; k <= K; ++k) {
    const std::size_t kk = static_cast<std::size_t>(k);
    const bool within = grid.visits[kk] <= lim;
    const int a_prev = cl.strategy.indicator(k - 1);
    const double x3_prev = x3c[kk - 1], x4_prev = x4c[kk - 1];
    x3c[kk] = (within && s.X3k[kk].has_value()) ? *s.X3k[kk] : f3(x3_prev, x4_prev, a_prev, k);
    x4c[kk] = (within && s.X4k[kk].has_value()) ? *s.X4k[kk] : f4(x3_prev, x4_prev, a_prev, k);
  }
}

// rng == nullptr gives the deterministic plug-in prediction.
inline void complete_trajectory(const SubjectRecord& s, const CloneRecord& cl,
                                const TransitionFit& tf, const VisitGrid& grid,
                                std::vector<double>& x3c, std::vector<double>& x4c,
                                Rng* rng = nullptr) {
  auto f3 = [&](double x3, double x4, int a, int) {
    (void)x4;
    double v = tf.b3[0] + tf.b3[1] * x3 + tf.b3[2] * static_cast<double>(a);
    return rng ? v + rng->normal(0.0, tf.sd3) : v;
  };
  auto f4 = [&](double, double x4, int, int) {
    double v = tf.b4[0] + tf.b4[1] * x4;
    return rng ? v + rng->normal(0.0, tf.sd4) : v;
  };
  complete_trajectory_with(s, cl, grid, f3, f4, x3c, x4c);
}

inline ContrastEstimate gformula_timedep(const std::vector<SubjectRecord>& subjects, int d1,
                                         int d0, const EstimatorConfig& cfg,
                                         const VisitGrid& grid) {
  if (subjects.empty() || !subjects.front().has_timevarying())
    throw EstimationError("trajectory G-formula needs time-varying covariates");
  const TransitionFit tf = fit_transitions(subjects, grid);
  const int J = grid.n_intervals();
  const int K = grid.K();
  const std::vector<std::string> covs =
      cfg.outcome_covs.empty() ? std::vector<std::string>{"X1", "X2", "X3k", "X4k"}
                               : cfg.outcome_covs;

  auto arm_rmst = [&](int d, std::uint64_t arm_tag) {
    const auto clones = clone_arm(subjects, Strategy(d, grid.K()), cfg.convention, grid);
    const auto rows = expand_visits(clones, subjects, grid, CovariateSpec{covs});
    const auto ofit = fit_pwexp(rows, J, [](const PersonPeriodRow& r) { return r.y; },
                                PwexpRole::outcome);

    double acc = 0.0;
    std::vector<double> x3c, x4c, lam(static_cast<std::size_t>(J)), feat(covs.size());
    for (std::size_t c = 0; c < clones.size(); ++c) {
      const SubjectRecord& s = subjects[static_cast<std::size_t>(clones[c].subject_index)];
      double subj = 0.0;
      const int draws = std::max(1, cfg.m_draws);
      for (int m = 0; m < draws; ++m) {
        Rng rng = Rng::for_unit(cfg.draw_seed + arm_tag,
                                0x7454u + static_cast<std::uint64_t>(m), c);
        complete_trajectory(s, clones[c], tf, grid, x3c, x4c, cfg.m_draws > 1 ? &rng : nullptr);
        for (int j = 1; j <= J; ++j) {
          const std::size_t kk = static_cast<std::size_t>(std::min(j - 1, K));
          for (std::size_t f = 0; f < covs.size(); ++f) {
            if (covs[f] == "X3k") feat[f] = x3c[kk];
            else if (covs[f] == "X4k") feat[f] = x4c[kk];
            else feat[f] = covariate_value(s, covs[f], j);
          }
          lam[static_cast<std::size_t>(j - 1)] = ofit.rate(j, feat);
        }
        subj += pwexp_rmst(lam, grid);
      }
      acc += subj / draws;
    }
    return acc / static_cast<double>(clones.size());
  };

  ContrastEstimate est;
  est.d1 = d1;
  est.d0 = d0;
  est.rmst_d1 = arm_rmst(d1, 1);
  est.rmst_d0 = arm_rmst(d0, 2);
  est.theta = est.rmst_d1 - est.rmst_d0;
  return est;
}

// --- presets and dispatch --------------------------------------------------------

inline EstimatorConfig estimator_preset(const std::string& name, Scenario::Kind kind) {
  const bool tv = kind == Scenario::Kind::timedep;
  EstimatorConfig c;
  c.name = name;
  if (name == "naive") {
    c.kind = "naive";
  } else if (name == "gform_filtered") {
    c.kind = "gform_filtered";
    c.outcome_covs = tv ? std::vector<std::string>{"X1", "X2", "X3k0", "X4k0"}
                        : std::vector<std::string>{"X1", "X2", "X3"};
  } else if (name == "km_cloned") {
    c.kind = "km_cloned";
  } else if (name == "ipcw_a") {
    c.kind = "ipcw";
    c.censor.art_covs = tv ? std::vector<std::string>{"X1", "X2", "X3k"}
                           : std::vector<std::string>{"X1", "X2"};
    c.censor.use_nat = false;
  } else if (name == "ipcw_a_n") {
    c.kind = "ipcw";
    c.censor.art_covs = tv ? std::vector<std::string>{"X1", "X2", "X3k"}
                           : std::vector<std::string>{"X1", "X2"};
    c.censor.nat_covs = tv ? std::vector<std::string>{"X1", "X2", "X4k"}
                           : std::vector<std::string>{"X2", "X3"};
  } else if (name == "ipcw_static") {
    c.kind = "ipcw";
    c.censor.art_covs = {"X1", "X2"};
    c.censor.nat_covs = {"X1", "X2"};
  } else if (name == "ipcw_joint_logit") {
    c.kind = "ipcw";
    c.censor.joint = "logit";
    c.censor.art_covs = tv ? std::vector<std::string>{"X1", "X2", "X3k", "X4k"}
                           : std::vector<std::string>{"X1", "X2", "X3"};
  } else if (name == "ipcw_joint_pwexp") {
    c.kind = "ipcw";
    c.censor.joint = "pwexp";
    c.censor.nat_covs = tv ? std::vector<std::string>{"X1", "X2", "X3k", "X4k"}
                           : std::vector<std::string>{"X1", "X2", "X3"};
  } else if (name == "ipcw_true") {
    c.kind = "ipcw_true";
  } else if (name == "gform_pwexp") {
    c.kind = "gform_pwexp";
    c.outcome_covs = {"X1", "X2", "X3"};
  } else if (name == "gform_weibull") {
    c.kind = "gform_weibull";
    c.outcome_covs = {"X1", "X2", "X3"};
  } else if (name == "gform_cloned") {
    c.kind = "gform_timedep";
    c.outcome_covs = {"X1", "X2", "X3k", "X4k"};
  } else if (name == "aipcw" || name == "aipcw_wrong_q" || name == "aipcw_wrong_w") {
    c.kind = "aipcw";
    c.censor.art_covs = {"X1", "X2"};
    c.censor.nat_covs = {"X2", "X3"};
    c.outcome_covs = {"X1", "X2", "X3"};
    if (name == "aipcw_wrong_q") c.q_source = "tau";
    if (name == "aipcw_wrong_w") {
      c.q_source = "true_dgp";
      c.w_source = "unit";
    }
  } else {
    throw std::invalid_argument("unknown estimator: " + name);
  }
  return c;
}

inline std::vector<std::string> default_battery(Scenario::Kind kind) {
  if (kind == Scenario::Kind::baseline)
    return {"naive",        "gform_filtered",   "km_cloned",   "ipcw_a",       "ipcw_a_n",
            "ipcw_joint_logit", "ipcw_joint_pwexp", "gform_pwexp", "gform_weibull"};
  return {"naive",       "gform_filtered",   "km_cloned",        "ipcw_a",      "ipcw_a_n",
          "ipcw_static", "ipcw_joint_logit", "ipcw_joint_pwexp", "gform_cloned"};
}

inline ContrastEstimate run_estimator(const EstimatorConfig& cfg, const Scenario& sc,
                                      const std::vector<SubjectRecord>& subjects, int d1, int d0,
                                      SurvivalExport* curves = nullptr) {
  const VisitGrid& grid = sc.grid;
  ContrastEstimate est;
  if (cfg.kind == "naive") {
    est = naive_filtered(subjects, d1, d0, grid);
  } else if (cfg.kind == "gform_filtered") {
    est = gformula_filtered(subjects, d1, d0, cfg.outcome_covs, grid);
  } else if (cfg.kind == "km_cloned") {
    est = km_cloned(subjects, d1, d0, cfg.convention, grid, curves);
  } else if (cfg.kind == "ipcw") {
    est = ipcw_km_contrast(subjects, d1, d0, cfg.censor, cfg.convention, grid, curves);
  } else if (cfg.kind == "ipcw_true") {
    if (sc.kind != Scenario::Kind::baseline)
      throw EstimationError("oracle weights are defined for the baseline cohort only");
    est = ipcw_true_weights(subjects, d1, d0, sc.base, cfg.convention, grid, curves);
  } else if (cfg.kind == "gform_pwexp") {
    est = gformula_baseline_pwexp(subjects, d1, d0, cfg.outcome_covs, cfg.convention, grid);
  } else if (cfg.kind == "gform_weibull") {
    est = gformula_baseline_weibull(subjects, d1, d0, cfg.outcome_covs, cfg.convention, grid);
  } else if (cfg.kind == "gform_timedep") {
    est = gformula_timedep(subjects, d1, d0, cfg, grid);
  } else if (cfg.kind == "aipcw") {
    est = aipcw_contrast(subjects, d1, d0, sc, cfg, grid);
  } else {
    throw std::invalid_argument("unknown estimator kind: " + cfg.kind);
  }
  est.label = cfg.name;
  return est;
}

}  // namespace ccw
