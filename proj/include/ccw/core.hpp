// Core domain types for clone-censor-weight survival analysis:
// static duration strategies, subject records, clones, and contrasts.
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ccw {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

inline double expit(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// A static treatment-duration rule over decision visits 0..K: treat at every
// visit k < d, stop from visit d onward. d = K+1 means "never stop".
struct Strategy {
  int d = 1;  // duration in visits, 1 <= d <= K+1
  int K = 4;  // index of the last post-baseline decision visit

  Strategy() = default;
  Strategy(int duration, int last_visit) : d(duration), K(last_visit) {
    if (d < 1 || d > K + 1) throw std::invalid_argument("strategy duration out of range");
  }

  // 1 if the rule prescribes treatment at visit k, else 0. Visit 0 is always treated.
  int indicator(int k) const {
    if (k < 0 || k > K) throw std::invalid_argument("visit index out of range");
    return k < d ? 1 : 0;
  }
};

// Common visit schedule: times v_0 < ... < v_K plus an integration horizon tau.
// Follow-up intervals are (bound[j-1], bound[j]] for j = 1..n_intervals(), where
// the final interval runs from the last visit to tau.
struct VisitGrid {
  std::vector<double> visits;  // v_0 = 0 first
  double tau = 0.0;

  VisitGrid() = default;
  VisitGrid(std::vector<double> v, double horizon) : visits(std::move(v)), tau(horizon) {
    if (visits.empty() || visits.front() != 0.0) throw std::invalid_argument("first visit must be 0");
    for (std::size_t i = 1; i < visits.size(); ++i)
      if (visits[i] <= visits[i - 1]) throw std::invalid_argument("visits must be strictly increasing");
    if (visits.back() >= tau) throw std::invalid_argument("horizon must exceed the last visit");
  }

  int n_visits() const { return static_cast<int>(visits.size()); }
  int K() const { return n_visits() - 1; }
  int n_intervals() const { return n_visits(); }  // K intervals between visits + tail to tau

  // Interval boundaries: visits..., tau. bound(0)=0, bound(n_intervals())=tau.
  double bound(int j) const { return j < n_visits() ? visits[j] : tau; }
  double interval_length(int j) const { return bound(j) - bound(j - 1); }  // 1-based j

  // 1-based index of the interval containing t, mapping boundary points to the
  // interval that ends there (t in (bound[j-1], bound[j]]). t=0 maps to 1.
  int interval_of(double t) const {
    if (t <= bound(1)) return 1;
    int lo = 1, hi = n_intervals();
    while (lo < hi) {
      int mid = (lo + hi) / 2;
      if (t <= bound(mid)) hi = mid; else lo = mid + 1;
    }
    return lo;
  }

  bool operator==(const VisitGrid&) const = default;
};

// One individual's simulated or observed follow-up. Per-visit series hold a
// value only for attended visits (std::nullopt marks "not observed").
struct SubjectRecord {
  std::int64_t id = 0;
  double X1 = 0, X2 = 0, X3 = 0;                 // baseline covariates
  std::vector<std::optional<double>> A;          // treatment at visit k
  std::vector<std::optional<double>> X3k, X4k;   // time-varying covariates (may be empty)
  double T_tilde = 0;                            // min(event, censoring, tau)
  int event = 0;                                 // 1 if the event was observed before censoring
  // Latent times kept by the simulators so oracle tests can see the truth.
  double latent_T = kNaN;
  double latent_C = kNaN;

  bool has_timevarying() const { return !X3k.empty(); }
};

// Index of the last attended visit with treatment taken. A_0 = 1 by design,
// so this is always well-defined and >= 0.
inline int observed_duration(const SubjectRecord& s) {
  if (s.A.empty()) throw std::invalid_argument("treatment series is empty");
  int dur = 0;
  for (std::size_t k = 0; k < s.A.size(); ++k)
    if (s.A[k].has_value() && *s.A[k] == 1.0) dur = static_cast<int>(k);
  return dur;
}

// A (subject, strategy) copy after artificial censoring at the first deviation.
struct CloneRecord {
  std::int64_t subject_index = 0;  // position in the source subject list
  Strategy strategy;
  double G = kInf;        // artificial censoring time (+inf if never deviating)
  double T_tilde_d = 0;   // min(T_tilde, G)
  int delta_d = 0;        // event indicator after truncation at G
  bool artificially_censored = false;
  bool naturally_censored = false;  // natural censoring ended follow-up before G and tau
};

// Result of any RMST contrast estimator. Internal unit is years; the report
// scale (months by default) is applied by the harness at output time.
struct ContrastEstimate {
  double rmst_d1 = 0;
  double rmst_d0 = 0;
  double theta = 0;  // rmst_d1 - rmst_d0
  std::string label;
  int d1 = 0, d0 = 0;
};

struct EstimationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace ccw
