// Replication summaries: mean, empirical standard error, bias, MSE, RMSE.
#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace ccw {

struct MetricsRow {
  std::string scenario;
  std::size_t n = 0;        // sample size per replicate
  std::string estimator;
  std::size_t n_reps = 0;   // replicates that produced an estimate
  std::size_t n_failed = 0;
  double truth = 0.0;
  double mean = 0.0;
  double ese = 0.0;         // sample SD of estimates, ddof = 1
  bool ese_defined = true;  // false when fewer than 2 estimates; ese reported as 0
  double bias = 0.0;
  double mse = 0.0;
  double rmse = 0.0;
};

inline MetricsRow compute_metrics(const std::vector<double>& estimates, double truth) {
  MetricsRow m;
  m.truth = truth;
  m.n_reps = estimates.size();
  if (estimates.empty()) {
    m.ese_defined = false;
    return m;
  }
  double acc = 0.0;
  for (double e : estimates) acc += e;
  m.mean = acc / static_cast<double>(estimates.size());
  m.bias = m.mean - truth;
  double ss = 0.0, sq = 0.0;
  for (double e : estimates) {
    ss += (e - m.mean) * (e - m.mean);
    sq += (e - truth) * (e - truth);
  }
  m.mse = sq / static_cast<double>(estimates.size());
  m.rmse = std::sqrt(m.mse);
  if (estimates.size() >= 2) {
    m.ese = std::sqrt(ss / static_cast<double>(estimates.size() - 1));
  } else {
    m.ese = 0.0;
    m.ese_defined = false;
  }
  return m;
}

}  // namespace ccw
