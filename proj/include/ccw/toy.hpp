// Two hand-checkable worked examples on a three-subject dataset with visits
// at 0, 1, 2 and a 3-year horizon: (a) discrete stay-probability weighting
// with supplied coefficients, plus weighted KM / RMST arithmetic; (b) the
// cloning table under both deviation conventions and trajectory completion
// with supplied arm-specific transition models. Every number printed by
// toy_report is verified against the worked answers.
#pragma once

#include <cmath>
#include <iomanip>
#include <ostream>
#include <vector>

#include "ccw/clone.hpp"
#include "ccw/core.hpp"
#include "ccw/estimators.hpp"
#include "ccw/km.hpp"
#include "ccw/panel.hpp"
#include "ccw/weights.hpp"

namespace ccw {

inline VisitGrid toy_grid() { return VisitGrid({0.0, 1.0, 2.0}, 3.0); }

inline std::vector<SubjectRecord> toy_subjects() {
  std::vector<SubjectRecord> out(3);
  auto& s1 = out[0];
  s1.id = 1;
  s1.X1 = 0;
  s1.X2 = 1;
  s1.A = {1.0, 0.0, 0.0};
  s1.X3k = {2.0, 1.8, std::nullopt};
  s1.X4k = {0.0, 1.0, std::nullopt};
  s1.T_tilde = 1.5;
  s1.event = 1;
  auto& s2 = out[1];
  s2.id = 2;
  s2.X1 = 1;
  s2.X2 = 0;
  s2.A = {1.0, 1.0, 0.0};
  s2.X3k = {1.0, 1.4, 1.1};
  s2.X4k = {1.0, 1.0, 0.0};
  s2.T_tilde = 2.5;
  s2.event = 1;
  auto& s3 = out[2];
  s3.id = 3;
  s3.X1 = 0;
  s3.X2 = 0;
  s3.A = {1.0, 1.0, 1.0};
  s3.X3k = {0.5, 0.7, 0.8};
  s3.X4k = {0.0, 1.0, 1.0};
  s3.T_tilde = 3.0;
  s3.event = 0;
  for (auto& s : out) s.X3 = *s.X3k[0];
  return out;
}

inline Strategy toy_stop_early() { return Strategy(1, 2); }   // treat at visit 0 only
inline Strategy toy_always_treat() { return Strategy(3, 2); } // treat at every visit

struct ToyWeightExample {
  std::vector<double> p_hat;  // six panel rows, clone-major then interval
  std::vector<double> G_t2;   // per clone: uncensored probability just before t = 2
  std::vector<double> W_t2;   // per clone: 1 / G
};

// Supplied pooled-logistic deviation model on the stop-early arm:
// logit p = -3 + 1.2*1{interval 2} + 0.8 X1 + 0.5 X2 + 0.6 X3(k) + 1.0 X4(k).
inline ToyWeightExample toy_weight_example() {
  const VisitGrid grid = toy_grid();
  const auto subjects = toy_subjects();
  const auto clones =
      clone_arm(subjects, toy_stop_early(), DeviationConvention::end_of_interval, grid);
  const std::vector<std::string> covs = {"X1", "X2", "X3k", "X4k"};
  const auto rows = expand_visits(clones, subjects, grid, CovariateSpec{covs});

  DiscreteStayModel m;
  m.dummy = {0, 1, -1};
  m.n_dummies = 2;
  m.beta = {-3.0, -1.8, 0.8, 0.5, 0.6, 1.0};
  m.cov_idx = {0, 1, 2, 3};
  m.converged = true;

  ToyWeightExample ex;
  std::vector<WeightTrajectory> traj(clones.size(), unit_trajectory(grid));
  for (const auto& r : rows) {
    const double p = m.p_event(r.j, r.covs);
    ex.p_hat.push_back(p);
    traj[static_cast<std::size_t>(r.clone_index)].p_stay_art[static_cast<std::size_t>(r.j - 1)] =
        1.0 - p;
  }
  for (auto& tr : traj) tr.finalize(grid);
  for (const auto& tr : traj) {
    const double w = tr.W(2.0, grid);
    ex.W_t2.push_back(w);
    ex.G_t2.push_back(1.0 / w);
  }
  return ex;
}

struct ToyKmExample {
  double surv0_at_15 = 0;  // stop-early arm survival at t = 1.5
  double rmst0 = 0;
  double surv1_at_25 = 0;  // always-treat arm survival at t = 2.5
  double rmst1 = 0;
  double contrast = 0;
};

// Weighted product-limit arithmetic on hand-supplied risk sets: the
// always-treat arm keeps subject 2's event at 2.5 with weight 1.818 and
// subject 3 at risk with weight 1.25; subject 1 left the risk set earlier.
inline ToyKmExample toy_km_example() {
  const double tau = toy_grid().tau;
  const std::vector<KmEntry> arm0 = {{0.0, 1.5, 1, 1.0}, {0.0, 2.0, 0, 1.0}, {0.0, 2.0, 0, 1.0}};
  const std::vector<KmEntry> arm1 = {{0.0, 1.5, 0, 1.0}, {0.0, 2.5, 1, 1.818}, {0.0, 3.0, 0, 1.25}};
  const StepSurvival s0 = weighted_km(arm0);
  const StepSurvival s1 = weighted_km(arm1);
  ToyKmExample ex;
  ex.surv0_at_15 = s0.value(1.5);
  ex.rmst0 = rmst(s0, tau);
  ex.surv1_at_25 = s1.value(2.5);
  ex.rmst1 = rmst(s1, tau);
  ex.contrast = ex.rmst1 - ex.rmst0;
  return ex;
}

struct ToyCloneTable {
  std::vector<CloneRecord> end_of_interval;  // 1a,2a,3a then 1b,2b,3b
  std::vector<CloneRecord> at_visit;
};

inline ToyCloneTable toy_clone_table() {
  const VisitGrid grid = toy_grid();
  const auto subjects = toy_subjects();
  ToyCloneTable t;
  for (auto conv : {DeviationConvention::end_of_interval, DeviationConvention::at_visit}) {
    auto& dst = conv == DeviationConvention::end_of_interval ? t.end_of_interval : t.at_visit;
    for (auto g : {toy_stop_early(), toy_always_treat()}) {
      auto arm = clone_arm(subjects, g, conv, grid);
      dst.insert(dst.end(), arm.begin(), arm.end());
    }
  }
  return t;
}

struct ToyCompletionExample {
  // order: stop-early clones of subjects 1..3, then always-treat clone of subject 1
  std::vector<double> x3_visit2;
  std::vector<double> x4_visit2;
  double x3_visit2_2b = 0, x4_visit2_2b = 0, x3_visit2_3b = 0;  // kept observed values
};

// Trajectory completion with supplied arm-specific transition models:
//   stop-early arm:    X3' = 0.3 + 0.6 X3 + 0.2 X4,  P(X4'=1) = expit(-0.8 + 0.7 X3 + 0.9 X4)
//   always-treat arm:  X3' = 0.2 + 0.5 X3 + 0.3 X4,  P(X4'=1) = expit(-0.6 + 0.6 X3 + 0.8 X4)
// Observed values at visits up to min(T^~, G) are kept; later or missing
// entries are imputed with the plug-in prediction.
inline ToyCompletionExample toy_completion_example() {
  const VisitGrid grid = toy_grid();
  const auto subjects = toy_subjects();
  const auto arm0 = clone_arm(subjects, toy_stop_early(), DeviationConvention::at_visit, grid);
  const auto arm1 = clone_arm(subjects, toy_always_treat(), DeviationConvention::at_visit, grid);

  auto f3_arm0 = [](double x3, double x4, int, int) { return 0.3 + 0.6 * x3 + 0.2 * x4; };
  auto f4_arm0 = [](double x3, double x4, int, int) { return expit(-0.8 + 0.7 * x3 + 0.9 * x4); };
  auto f3_arm1 = [](double x3, double x4, int, int) { return 0.2 + 0.5 * x3 + 0.3 * x4; };
  auto f4_arm1 = [](double x3, double x4, int, int) { return expit(-0.6 + 0.6 * x3 + 0.8 * x4); };

  ToyCompletionExample ex;
  std::vector<double> x3c, x4c;
  for (std::size_t c = 0; c < arm0.size(); ++c) {
    complete_trajectory_with(subjects[static_cast<std::size_t>(arm0[c].subject_index)], arm0[c],
                             grid, f3_arm0, f4_arm0, x3c, x4c);
    ex.x3_visit2.push_back(x3c[2]);
    ex.x4_visit2.push_back(x4c[2]);
  }
  complete_trajectory_with(subjects[0], arm1[0], grid, f3_arm1, f4_arm1, x3c, x4c);
  ex.x3_visit2.push_back(x3c[2]);
  ex.x4_visit2.push_back(x4c[2]);
  complete_trajectory_with(subjects[1], arm1[1], grid, f3_arm1, f4_arm1, x3c, x4c);
  ex.x3_visit2_2b = x3c[2];
  ex.x4_visit2_2b = x4c[2];
  complete_trajectory_with(subjects[2], arm1[2], grid, f3_arm1, f4_arm1, x3c, x4c);
  ex.x3_visit2_3b = x3c[2];
  return ex;
}

// Print every toy quantity next to its hand-worked value; returns true when
// all agree within the stated tolerances.
inline bool toy_report(std::ostream& os) {
  bool ok = true;
  auto check = [&](const char* label, double got, double want, double tol) {
    const bool pass = std::abs(got - want) <= tol;
    ok = ok && pass;
    os << "  " << label << ": " << std::setprecision(6) << got << "  (expected " << want
       << " +/- " << tol << ") " << (pass ? "ok" : "MISMATCH") << '\n';
  };

  os << "deviation-model weighting example (stop-early arm)\n";
  const auto w = toy_weight_example();
  const double p_want[6] = {0.214, 0.686, 0.354, 0.698, 0.063, 0.406};
  for (int i = 0; i < 6; ++i) {
    std::string label = "p_hat[" + std::to_string(i) + "]";
    check(label.c_str(), w.p_hat[static_cast<std::size_t>(i)], p_want[i], 1e-3);
  }
  const double g_want[3] = {0.786, 0.646, 0.937};
  const double w_want[3] = {1.272, 1.548, 1.067};
  for (int i = 0; i < 3; ++i) {
    std::string gl = "G(2-)[" + std::to_string(i) + "]", wl = "W(2)[" + std::to_string(i) + "]";
    check(gl.c_str(), w.G_t2[static_cast<std::size_t>(i)], g_want[i], 1e-3);
    check(wl.c_str(), w.W_t2[static_cast<std::size_t>(i)], w_want[i], 1e-3);
  }

  os << "weighted product-limit example\n";
  const auto km = toy_km_example();
  check("S_stop-early(1.5)", km.surv0_at_15, 2.0 / 3.0, 1e-9);
  check("RMST stop-early", km.rmst0, 2.5, 1e-9);
  check("S_always-treat(2.5)", km.surv1_at_25, 0.407424, 5e-4);
  check("RMST always-treat", km.rmst1, 2.703712, 1e-3);
  check("contrast", km.contrast, 0.2035, 1e-3);

  os << "trajectory completion example\n";
  const auto comp = toy_completion_example();
  const double x3_want[4] = {1.58, 1.34, 0.92, 1.40};
  const double x4_want[4] = {0.796, 0.746, 0.643, 0.782};
  for (int i = 0; i < 4; ++i) {
    std::string l3 = "X3 imputed[" + std::to_string(i) + "]";
    std::string l4 = "X4 imputed[" + std::to_string(i) + "]";
    check(l3.c_str(), comp.x3_visit2[static_cast<std::size_t>(i)], x3_want[i], 1e-9);
    check(l4.c_str(), comp.x4_visit2[static_cast<std::size_t>(i)], x4_want[i], 1e-3);
  }
  check("X3 kept (subject 2, always-treat)", comp.x3_visit2_2b, 1.1, 1e-12);
  check("X4 kept (subject 2, always-treat)", comp.x4_visit2_2b, 0.0, 1e-12);
  check("X3 kept (subject 3, always-treat)", comp.x3_visit2_3b, 0.8, 1e-12);

  os << (ok ? "all toy values reproduced\n" : "TOY VALUE MISMATCH\n");
  return ok;
}

}  // namespace ccw
