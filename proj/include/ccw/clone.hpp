// Cloning and artificial censoring: replicate each subject once per
// candidate strategy and censor the copy at its first deviation from the
// assigned rule.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "ccw/core.hpp"

namespace ccw {

// When a deviation is detected at attended visit k, the clone's artificial
// censoring time is either the visit time itself or the end of the interval
// that starts there (next visit, or tau after the last visit).
enum class DeviationConvention { end_of_interval, at_visit };

inline const char* to_string(DeviationConvention c) {
  return c == DeviationConvention::at_visit ? "at_visit" : "end_of_interval";
}

// First attended visit whose treatment disagrees with the rule determines G;
// +inf when the observed history never deviates. Visits after the end of
// follow-up are unattended (no treatment value) and are never checked.
inline double artificial_censor_time(const SubjectRecord& s, const Strategy& g,
                                     DeviationConvention conv, const VisitGrid& grid) {
  const int K = grid.K();
  const int last = std::min<int>(K, static_cast<int>(s.A.size()) - 1);
  for (int k = 0; k <= last; ++k) {
    if (!s.A[k].has_value()) continue;
    if (*s.A[k] != static_cast<double>(g.indicator(k))) {
      return conv == DeviationConvention::at_visit ? grid.visits[k] : grid.bound(k + 1);
    }
  }
  return kInf;
}

inline CloneRecord make_clone(const SubjectRecord& s, std::int64_t subject_index,
                              const Strategy& g, DeviationConvention conv,
                              const VisitGrid& grid) {
  CloneRecord c;
  c.subject_index = subject_index;
  c.strategy = g;
  c.G = artificial_censor_time(s, g, conv, grid);
  c.T_tilde_d = std::min(s.T_tilde, c.G);
  c.delta_d = (s.event == 1 && s.T_tilde <= c.G) ? 1 : 0;
  c.artificially_censored = (c.delta_d == 0) && std::isfinite(c.G) && (c.G <= s.T_tilde);
  c.naturally_censored = (c.delta_d == 0) && !c.artificially_censored &&
                         (s.event == 0) && (s.T_tilde < grid.tau);
  return c;
}

// One clone per (subject, strategy), subjects outermost.
inline std::vector<CloneRecord> clone_dataset(const std::vector<SubjectRecord>& subjects,
                                              const std::vector<Strategy>& strategies,
                                              DeviationConvention conv, const VisitGrid& grid) {
  std::vector<CloneRecord> out;
  out.reserve(subjects.size() * strategies.size());
  for (std::size_t i = 0; i < subjects.size(); ++i)
    for (const Strategy& g : strategies)
      out.push_back(make_clone(subjects[i], static_cast<std::int64_t>(i), g, conv, grid));
  return out;
}

inline std::vector<CloneRecord> clone_arm(const std::vector<SubjectRecord>& subjects,
                                          const Strategy& g, DeviationConvention conv,
                                          const VisitGrid& grid) {
  return clone_dataset(subjects, {g}, conv, grid);
}

// Per-arm, per-interval at-risk and censoring-type counts, with a warning
// flag when any at-risk count falls below the configured floor.
struct SupportRow {
  int d = 0;
  int interval = 0;  // 1-based
  std::int64_t at_risk = 0;
  std::int64_t artificial = 0;
  std::int64_t natural = 0;
};

struct SupportDiagnostics {
  std::vector<SupportRow> rows;
  bool low_support = false;
  std::int64_t floor = 5;
};

inline SupportDiagnostics support_diagnostics(const std::vector<CloneRecord>& clones,
                                              const VisitGrid& grid, std::int64_t floor = 5) {
  SupportDiagnostics diag;
  diag.floor = floor;
  if (clones.empty()) return diag;
  std::vector<int> arms;
  for (const auto& c : clones)
    if (std::find(arms.begin(), arms.end(), c.strategy.d) == arms.end()) arms.push_back(c.strategy.d);
  std::sort(arms.begin(), arms.end());
  const int J = grid.n_intervals();
  for (int d : arms) {
    for (int j = 1; j <= J; ++j) {
      SupportRow row;
      row.d = d;
      row.interval = j;
      for (const auto& c : clones) {
        if (c.strategy.d != d) continue;
        if (c.T_tilde_d > grid.bound(j - 1)) ++row.at_risk;
        const bool ends_here = c.T_tilde_d > grid.bound(j - 1) && c.T_tilde_d <= grid.bound(j);
        if (ends_here && c.artificially_censored) ++row.artificial;
        if (ends_here && c.naturally_censored) ++row.natural;
      }
      diag.low_support = diag.low_support || (row.at_risk < floor);
      diag.rows.push_back(row);
    }
  }
  return diag;
}

}  // namespace ccw
