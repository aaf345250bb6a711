// Weighted Kaplan-Meier product-limit estimation and restricted-mean
// integration of step survival curves.
#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "ccw/clone.hpp"
#include "ccw/core.hpp"
#include "ccw/weights.hpp"

namespace ccw {

// Right-continuous step function with S(0) = 1 and a drop at each jump time.
struct StepSurvival {
  std::vector<double> times;  // sorted ascending
  std::vector<double> surv;   // value just after the matching time

  double value(double t) const {
    auto it = std::upper_bound(times.begin(), times.end(), t);
    if (it == times.begin()) return 1.0;
    return surv[static_cast<std::size_t>(it - times.begin()) - 1];
  }
};

// Exact step integral of the curve from 0 to tau.
inline double rmst(const StepSurvival& s, double tau) {
  if (tau <= 0.0) throw std::invalid_argument("horizon must be positive");
  double acc = 0.0, prev_t = 0.0, prev_s = 1.0;
  for (std::size_t k = 0; k < s.times.size(); ++k) {
    if (s.times[k] >= tau) break;
    acc += prev_s * (s.times[k] - prev_t);
    prev_t = s.times[k];
    prev_s = s.surv[k];
  }
  acc += prev_s * (tau - prev_t);
  return acc;
}

// One at-risk segment of a clone with the weight applying at its endpoint.
// Exact when the segments have been refined at all event times (each at-risk
// clone then contributes a segment ending at each event time).
struct KmEntry {
  double t_start = 0, t_stop = 0;
  int event = 0;
  double weight = 1.0;
};

inline StepSurvival weighted_km(const std::vector<KmEntry>& entries) {
  std::vector<double> times;
  for (const auto& e : entries)
    if (e.event == 1) times.push_back(e.t_stop);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());

  StepSurvival out;
  double S = 1.0;
  for (double t : times) {
    double d = 0.0, Y = 0.0;
    for (const auto& e : entries) {
      if (e.weight <= 0.0) throw std::invalid_argument("weights must be positive");
      if (e.t_start < t && t <= e.t_stop) Y += e.weight;
      if (e.event == 1 && e.t_stop == t) d += e.weight;
    }
    if (Y <= 0.0) throw EstimationError("empty weighted risk set at an event time");
    S *= 1.0 - d / Y;
    out.times.push_back(t);
    out.surv.push_back(S);
  }
  return out;
}

// Weighted KM over one arm's clones with weights evaluated exactly from the
// trajectories at every event time (equivalent to refining the panel at event
// times and running the segment form above).
inline StepSurvival weighted_km_clones(const std::vector<CloneRecord>& clones,
                                       const std::vector<WeightTrajectory>& weights,
                                       const VisitGrid& grid) {
  std::vector<double> times;
  times.reserve(clones.size());
  for (const auto& c : clones)
    if (c.delta_d == 1) times.push_back(c.T_tilde_d);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());

  // sort clone indices by follow-up descending so the at-risk set for
  // successive (ascending) event times is a shrinking prefix
  std::vector<std::size_t> order(clones.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return clones[a].T_tilde_d > clones[b].T_tilde_d;
  });

  StepSurvival out;
  double S = 1.0;
  for (double t : times) {
    double d = 0.0, Y = 0.0;
    for (std::size_t i : order) {
      const CloneRecord& c = clones[i];
      if (c.T_tilde_d < t) break;
      const double w = weights[i].W(t, grid);
      Y += w;
      if (c.delta_d == 1 && c.T_tilde_d == t) d += w;
    }
    if (Y <= 0.0) throw EstimationError("empty weighted risk set at an event time");
    S *= 1.0 - d / Y;
    out.times.push_back(t);
    out.surv.push_back(S);
  }
  return out;
}

}  // namespace ccw
