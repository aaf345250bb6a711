// Inverse-probability-of-censoring weights: a discrete per-interval stay
// model for artificial censoring (pooled logistic), a continuous
// piecewise-exponential model for natural censoring, single-model "joint"
// variants treating the union event with one regression, and oracle weights
// computed from the data-generating coefficients.
#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "ccw/clone.hpp"
#include "ccw/core.hpp"
#include "ccw/dgp.hpp"
#include "ccw/glm.hpp"
#include "ccw/hazard.hpp"
#include "ccw/panel.hpp"

namespace ccw {

// Per-clone weight W(t) = 1 / (G_art(t) * G_nat(t)). The artificial factor
// counts only censoring opportunities in intervals fully elapsed before t,
// so it is constant within each visit interval; the natural factor accrues
// continuously through exp(lam_nat * (t - interval start)).
struct WeightTrajectory {
  std::vector<double> p_stay_art;  // per interval, in (0, 1]
  std::vector<double> lam_nat;     // per interval, >= 0
  std::vector<double> logw_start;  // cumulative log-weight at interval starts
  double cap = kInf;               // truncation cap on W (off by default)

  void finalize(const VisitGrid& grid) {
    const int J = grid.n_intervals();
    logw_start.assign(static_cast<std::size_t>(J), 0.0);
    for (int j = 2; j <= J; ++j) {
      const std::size_t l = static_cast<std::size_t>(j - 2);  // previous interval
      logw_start[static_cast<std::size_t>(j - 1)] =
          logw_start[l] - std::log(p_stay_art[l]) + lam_nat[l] * grid.interval_length(j - 1);
    }
  }

  double W(double t, const VisitGrid& grid) const {
    const int j = grid.interval_of(t);
    const std::size_t jj = static_cast<std::size_t>(j - 1);
    const double w = std::exp(logw_start[jj] + lam_nat[jj] * (t - grid.bound(j - 1)));
    return std::min(w, cap);
  }
};

inline WeightTrajectory unit_trajectory(const VisitGrid& grid) {
  WeightTrajectory tr;
  tr.p_stay_art.assign(static_cast<std::size_t>(grid.n_intervals()), 1.0);
  tr.lam_nat.assign(static_cast<std::size_t>(grid.n_intervals()), 0.0);
  tr.finalize(grid);
  return tr;
}

// Multiplying weights adds their log components.
inline WeightTrajectory combine_weights(const WeightTrajectory& art, const WeightTrajectory& nat,
                                        const VisitGrid& grid) {
  WeightTrajectory tr;
  const std::size_t J = art.p_stay_art.size();
  tr.p_stay_art.resize(J);
  tr.lam_nat.resize(J);
  for (std::size_t j = 0; j < J; ++j) {
    tr.p_stay_art[j] = art.p_stay_art[j] * nat.p_stay_art[j];
    tr.lam_nat[j] = art.lam_nat[j] + nat.lam_nat[j];
  }
  tr.cap = std::min(art.cap, nat.cap);
  tr.finalize(grid);
  return tr;
}

// Pooled logistic with interval dummies restricted to intervals containing
// at least one response event; elsewhere the event probability is 0 (stay
// probability 1), matching the saturated no-information answer.
struct DiscreteStayModel {
  std::vector<int> dummy;            // per interval: dummy column or -1
  std::size_t n_dummies = 0;
  std::vector<double> beta;          // dummy coefs then covariate coefs
  std::vector<std::size_t> cov_idx;  // columns of the union covariate vector
  bool converged = false;

  double p_event(int j, const std::vector<double>& union_covs) const {
    const int di = dummy[static_cast<std::size_t>(j - 1)];
    if (di < 0) return 0.0;
    double eta = beta[static_cast<std::size_t>(di)];
    for (std::size_t k = 0; k < cov_idx.size(); ++k)
      eta += beta[n_dummies + k] * union_covs[cov_idx[k]];
    return expit(eta);
  }
};

inline DiscreteStayModel fit_discrete_stay(const std::vector<PersonPeriodRow>& rows, int J,
                                           const std::function<int(const PersonPeriodRow&)>& response,
                                           const std::vector<std::size_t>& cov_idx) {
  DiscreteStayModel m;
  m.cov_idx = cov_idx;
  m.dummy.assign(static_cast<std::size_t>(J), -1);
  std::vector<char> has_event(static_cast<std::size_t>(J), 0);
  for (const auto& r : rows)
    if (response(r) == 1) has_event[static_cast<std::size_t>(r.j - 1)] = 1;
  int pos = 0;
  for (int j = 1; j <= J; ++j)
    if (has_event[static_cast<std::size_t>(j - 1)]) m.dummy[static_cast<std::size_t>(j - 1)] = pos++;
  m.n_dummies = static_cast<std::size_t>(pos);
  if (pos == 0) {  // no events anywhere: stay probability 1 everywhere
    m.converged = true;
    return m;
  }
  DesignMatrix d;
  d.p = m.n_dummies + cov_idx.size();
  for (const auto& r : rows) {
    const int di = m.dummy[static_cast<std::size_t>(r.j - 1)];
    if (di < 0) continue;
    for (std::size_t c = 0; c < m.n_dummies; ++c)
      d.X.push_back(c == static_cast<std::size_t>(di) ? 1.0 : 0.0);
    for (std::size_t k : cov_idx) d.X.push_back(r.covs[k]);
    d.y.push_back(response(r));
    ++d.n;
  }
  const FittedGlm fit = fit_logistic(d);
  m.beta = fit.beta;
  m.converged = fit.converged;
  return m;
}

// Piecewise-exponential censoring hazard on a covariate subset of the rows.
inline PwexpFit fit_censor_hazard(const std::vector<PersonPeriodRow>& rows, int J,
                                  const std::function<int(const PersonPeriodRow&)>& response,
                                  const std::vector<std::size_t>& cov_idx) {
  std::vector<PersonPeriodRow> sub = rows;
  for (auto& r : sub) {
    std::vector<double> c;
    c.reserve(cov_idx.size());
    for (std::size_t k : cov_idx) c.push_back(r.covs[k]);
    r.covs = std::move(c);
  }
  return fit_pwexp(sub, J, response, PwexpRole::censor);
}

// How the censoring mechanism is modeled for one IPCW analysis.
struct CensorModelConfig {
  std::vector<std::string> art_covs;  // artificial-censoring logistic
  std::vector<std::string> nat_covs;  // natural-censoring hazard
  bool use_art = true;
  bool use_nat = true;
  std::string joint;                  // "": separate; "logit" | "pwexp": one model for the union event
  bool truncate = false;              // cap weights at 1e3
};

inline std::vector<std::size_t> column_indices(const std::vector<std::string>& names,
                                               const std::vector<std::string>& universe) {
  std::vector<std::size_t> idx;
  for (const auto& n : names) {
    auto it = std::find(universe.begin(), universe.end(), n);
    if (it == universe.end()) throw std::invalid_argument("covariate not in panel: " + n);
    idx.push_back(static_cast<std::size_t>(it - universe.begin()));
  }
  return idx;
}

// Fit the configured censoring models on one arm's panel and evaluate a
// weight trajectory per clone. The panel must be built from the arm's clone
// vector so clone_index addresses positions in it.
inline std::vector<WeightTrajectory> fitted_trajectories(
    const std::vector<PersonPeriodRow>& rows, std::size_t n_clones,
    const std::vector<std::string>& panel_covs, const CensorModelConfig& cfg,
    const VisitGrid& grid) {
  const int J = grid.n_intervals();
  DiscreteStayModel stay;
  PwexpFit nat;
  bool use_stay = false, use_haz = false;
  if (cfg.joint == "logit") {
    stay = fit_discrete_stay(rows, J, [](const PersonPeriodRow& r) { return r.art_censor | r.k_nat; },
                             column_indices(cfg.art_covs, panel_covs));
    use_stay = true;
  } else if (cfg.joint == "pwexp") {
    nat = fit_censor_hazard(rows, J, [](const PersonPeriodRow& r) { return r.art_censor | r.k_nat; },
                            column_indices(cfg.nat_covs, panel_covs));
    use_haz = true;
  } else {
    if (cfg.use_art) {
      stay = fit_discrete_stay(rows, J, [](const PersonPeriodRow& r) { return r.art_censor; },
                               column_indices(cfg.art_covs, panel_covs));
      use_stay = true;
    }
    if (cfg.use_nat) {
      nat = fit_censor_hazard(rows, J, [](const PersonPeriodRow& r) { return r.k_nat; },
                              column_indices(cfg.nat_covs, panel_covs));
      use_haz = true;
    }
  }
  const auto nat_idx = use_haz ? column_indices(cfg.nat_covs, panel_covs) : std::vector<std::size_t>{};

  std::vector<WeightTrajectory> out(n_clones);
  for (auto& tr : out) {
    tr.p_stay_art.assign(static_cast<std::size_t>(J), 1.0);
    tr.lam_nat.assign(static_cast<std::size_t>(J), 0.0);
    if (cfg.truncate) tr.cap = 1e3;
  }
  std::vector<double> sub;
  for (const auto& r : rows) {
    auto& tr = out[static_cast<std::size_t>(r.clone_index)];
    if (use_stay)
      tr.p_stay_art[static_cast<std::size_t>(r.j - 1)] = 1.0 - stay.p_event(r.j, r.covs);
    if (use_haz) {
      sub.clear();
      for (std::size_t k : nat_idx) sub.push_back(r.covs[k]);
      tr.lam_nat[static_cast<std::size_t>(r.j - 1)] = nat.rate(r.j, sub);
    }
  }
  for (auto& tr : out) tr.finalize(grid);
  return out;
}

// Oracle weights for the baseline cohort: stay probabilities from the true
// treatment model along the complying path, natural hazard from the true
// censoring coefficients with treatment pinned to the strategy.
inline std::vector<WeightTrajectory> true_baseline_trajectories(
    const std::vector<SubjectRecord>& subjects, const std::vector<CloneRecord>& arm_clones,
    const BaselineParams& p, DeviationConvention conv, const VisitGrid& grid) {
  const int J = grid.n_intervals();
  const int K = grid.K();
  std::vector<WeightTrajectory> out(arm_clones.size());
  for (std::size_t c = 0; c < arm_clones.size(); ++c) {
    const CloneRecord& cl = arm_clones[c];
    const SubjectRecord& s = subjects[static_cast<std::size_t>(cl.subject_index)];
    const Strategy& g = cl.strategy;
    WeightTrajectory tr;
    tr.p_stay_art.assign(static_cast<std::size_t>(J), 1.0);
    tr.lam_nat.assign(static_cast<std::size_t>(J), 0.0);
    for (int j = 1; j <= J; ++j) {
      // treatment-refresh visit whose deviation lands in interval j
      const int kv = conv == DeviationConvention::at_visit ? j : j - 1;
      if (kv >= 1 && kv <= K) {
        const double gt = (kv <= 2) ? p.gt_pre : p.gt_post;
        const double pA =
            expit(p.g0 + p.gA * g.indicator(kv - 1) + p.gX1 * s.X1 + p.gX2 * s.X2 + gt);
        tr.p_stay_art[static_cast<std::size_t>(j - 1)] = g.indicator(kv) == 1 ? pA : 1.0 - pA;
      }
      const int k = j - 1;  // hazard interval index as the simulator counts it
      const double bt = (k <= 2) ? p.bt_pre : p.bt_post;
      tr.lam_nat[static_cast<std::size_t>(j - 1)] =
          p.b_mult * std::exp(p.b0 + p.bA * g.indicator(std::min(k, K)) + p.bX2 * s.X2 +
                              p.bX3 * s.X3 + bt);
    }
    tr.finalize(grid);
    out[c] = std::move(tr);
  }
  return out;
}

}  // namespace ccw
