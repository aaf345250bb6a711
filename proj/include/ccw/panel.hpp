// Person-period expansion of clone follow-up on the visit grid, refinement at
// arbitrary cut times, and long-format CSV export.
#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "ccw/clone.hpp"
#include "ccw/core.hpp"

namespace ccw {

// Named covariate columns resolved against a SubjectRecord and the 1-based
// interval index j. Supported names:
//   X1, X2, X3          : fixed baseline values
//   X3k, X4k            : time-varying value at the interval-start visit,
//                         carried back to the most recent observed visit
//   X3k0, X4k0          : time-varying value at visit 0
struct CovariateSpec {
  std::vector<std::string> names;
};

inline double covariate_value(const SubjectRecord& s, const std::string& name, int j) {
  auto carried = [&](const std::vector<std::optional<double>>& series) {
    int k = std::min<int>(j - 1, static_cast<int>(series.size()) - 1);
    for (; k >= 0; --k)
      if (series[static_cast<std::size_t>(k)].has_value()) return *series[static_cast<std::size_t>(k)];
    return 0.0;
  };
  if (name == "X1") return s.X1;
  if (name == "X2") return s.X2;
  if (name == "X3") return s.X3;
  if (name == "X3k") return carried(s.X3k);
  if (name == "X4k") return carried(s.X4k);
  if (name == "X3k0") return s.X3k.empty() || !s.X3k[0] ? 0.0 : *s.X3k[0];
  if (name == "X4k0") return s.X4k.empty() || !s.X4k[0] ? 0.0 : *s.X4k[0];
  throw std::invalid_argument("unknown covariate name: " + name);
}

// One at-risk row of a clone over (t_start, t_stop]. Refinement fragments
// keep the original visit-interval index j so hazard models stay indexed by
// the visit grid.
struct PersonPeriodRow {
  std::int64_t clone_index = 0;
  std::int64_t subject_index = 0;
  int d = 0;
  int j = 1;                  // 1-based visit interval
  double t_start = 0, t_stop = 0;
  std::vector<double> covs;   // snapshot at the interval-start visit
  int y = 0;                  // event at t_stop
  int k_nat = 0;              // natural censoring at t_stop
  int art_censor = 0;         // artificial censoring at t_stop
};

// Split each clone's [0, T_tilde_d] at interior visit times; terminal
// indicators land on the last row. Covariates snapshot at interval start.
inline std::vector<PersonPeriodRow> expand_visits(const std::vector<CloneRecord>& clones,
                                                  const std::vector<SubjectRecord>& subjects,
                                                  const VisitGrid& grid,
                                                  const CovariateSpec& spec) {
  std::vector<PersonPeriodRow> rows;
  rows.reserve(clones.size() * 3);
  for (std::size_t ci = 0; ci < clones.size(); ++ci) {
    const CloneRecord& c = clones[ci];
    const SubjectRecord& s = subjects[static_cast<std::size_t>(c.subject_index)];
    const double Td = std::min(c.T_tilde_d, grid.tau);
    if (Td <= 0.0) throw std::invalid_argument("clone with zero follow-up cannot be expanded");
    const int last_j = grid.interval_of(Td);
    for (int j = 1; j <= last_j; ++j) {
      PersonPeriodRow r;
      r.clone_index = static_cast<std::int64_t>(ci);
      r.subject_index = c.subject_index;
      r.d = c.strategy.d;
      r.j = j;
      r.t_start = grid.bound(j - 1);
      r.t_stop = std::min(grid.bound(j), Td);
      r.covs.reserve(spec.names.size());
      for (const auto& name : spec.names) r.covs.push_back(covariate_value(s, name, j));
      if (j == last_j) {
        r.y = c.delta_d;
        r.art_censor = c.artificially_censored ? 1 : 0;
        r.k_nat = c.naturally_censored ? 1 : 0;
      }
      rows.push_back(std::move(r));
    }
  }
  return rows;
}

// Further split rows at interior cut times, preserving j and moving terminal
// indicators to the final fragment. Cuts at boundaries or outside rows are
// no-ops.
inline std::vector<PersonPeriodRow> refine_at_times(const std::vector<PersonPeriodRow>& rows,
                                                    std::vector<double> cut_times) {
  std::sort(cut_times.begin(), cut_times.end());
  cut_times.erase(std::unique(cut_times.begin(), cut_times.end()), cut_times.end());
  std::vector<PersonPeriodRow> out;
  out.reserve(rows.size() + cut_times.size());
  for (const auto& r : rows) {
    auto lo = std::upper_bound(cut_times.begin(), cut_times.end(), r.t_start);
    auto hi = std::lower_bound(cut_times.begin(), cut_times.end(), r.t_stop);
    double start = r.t_start;
    PersonPeriodRow frag = r;
    for (auto it = lo; it != hi; ++it) {
      frag.t_start = start;
      frag.t_stop = *it;
      frag.y = frag.k_nat = frag.art_censor = 0;
      out.push_back(frag);
      start = *it;
    }
    frag = r;
    frag.t_start = start;
    out.push_back(std::move(frag));
  }
  return out;
}

inline void write_long_csv(const std::vector<PersonPeriodRow>& rows,
                           const std::vector<std::string>& cov_names,
                           const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  f << "clone_id,arm,j,t_start,t_stop";
  for (const auto& n : cov_names) f << ',' << n;
  f << ",y,k_nat,art_censor\n";
  for (const auto& r : rows) {
    f << r.clone_index << ',' << r.d << ',' << r.j << ',' << r.t_start << ',' << r.t_stop;
    for (double v : r.covs) f << ',' << v;
    f << ',' << r.y << ',' << r.k_nat << ',' << r.art_censor << '\n';
  }
}

}  // namespace ccw
