// Simulators for the two synthetic cohorts (baseline-covariate and
// time-varying-covariate designs), scenario presets, and the Monte Carlo
// oracle for true restricted mean survival under a forced strategy.
#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "ccw/core.hpp"
#include "ccw/rng.hpp"

namespace ccw {

// Piecewise-constant-hazard cohort with fixed baseline covariates X1,X2,X3.
// Treatment refresh at visit kv uses the period effect for kv itself
// (pre-period when kv <= 2); hazards in interval k use the period effect
// for k (pre-period when k <= 2).
struct BaselineParams {
  // logit P(A_kv = 1 | A_{kv-1}, X) = g0 + gA*A_{kv-1} + gX1*X1 + gX2*X2 + gt(kv)
  double g0, gA, gX1, gX2, gt_pre, gt_post;
  // log lambda_T(k) = a0 + aA*A_k + aX1*X1 + aX2*X2 + aX3*X3 + at(k)
  double a0, aA, aX1, aX2, aX3, at_pre, at_post;
  // lambda_C(k) = b_mult * exp(b0 + bA*A_k + bX2*X2 + bX3*X3 + bt(k))
  double b_mult, b0, bA, bX2, bX3, bt_pre, bt_post;
  // covariate means (unit variances)
  double mu1 = 0.5, mu2 = -0.5, mu3 = -0.5;
};

// Cohort with two time-varying covariates X3_k, X4_k on top of fixed X1,X2.
// Hazard period effects switch after interval 2 (event) / interval 3
// (censoring); the treatment period effect is indexed by the origin visit.
struct TimedepParams {
  // logit P(A_{k+1}=1) = g0 + gX1*X1 + gX2*X2 + gX3*(0.1*k)*X3_{k+1} + gAp*A_k + gt(k)
  double g0, gX1, gX2, gX3, gAp, gt_pre, gt_post;
  // log lambda_T(k) = a0 + aA*A_k + aX1*X1 + aX2*X2 + aX3*X3_k + aX4*X4_k + at(k)
  double a0, aA, aX1, aX2, aX3, aX4, at_pre, at_post;
  // lambda_C(k) = b_mult * exp(b0 + bA*A_k + bX1*X1 + bX2*X2 + bX4*X4_k + bt(k))
  double b_mult, b0, bA, bX1, bX2, bX4, bt_pre, bt_post;
  // X3_{k+1} = c3i + c3p*X3_k + c3a*A_k + N(0, s3^2); X4_{k+1} = c4i + c4p*X4_k + N(0, s4^2)
  double c3i, c3p, c3a, s3;
  double c4i, c4p, s4;
};

struct Scenario {
  enum class Kind { baseline, timedep };
  std::string name;
  Kind kind = Kind::baseline;
  BaselineParams base{};
  TimedepParams tv{};
  VisitGrid grid{std::vector<double>{0, 1, 2, 3, 4}, 10.0};
};

struct SimOptions {
  std::optional<Strategy> force;        // pin every attended treatment to the rule
  bool disable_natural_censoring = false;
};

namespace detail {
inline void fold_hash(std::uint64_t& h, double v) {
  std::uint64_t bits;
  static_assert(sizeof(bits) == sizeof(v));
  std::memcpy(&bits, &v, sizeof(bits));
  h ^= bits + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
}
}  // namespace detail

inline std::uint64_t params_hash(const Scenario& sc) {
  std::uint64_t h = sc.kind == Scenario::Kind::baseline ? 0x1ULL : 0x2ULL;
  auto f = [&h](double v) { detail::fold_hash(h, v); };
  if (sc.kind == Scenario::Kind::baseline) {
    const auto& p = sc.base;
    for (double v : {p.g0, p.gA, p.gX1, p.gX2, p.gt_pre, p.gt_post,
                     p.a0, p.aA, p.aX1, p.aX2, p.aX3, p.at_pre, p.at_post,
                     p.b_mult, p.b0, p.bA, p.bX2, p.bX3, p.bt_pre, p.bt_post,
                     p.mu1, p.mu2, p.mu3})
      f(v);
  } else {
    const auto& p = sc.tv;
    for (double v : {p.g0, p.gX1, p.gX2, p.gX3, p.gAp, p.gt_pre, p.gt_post,
                     p.a0, p.aA, p.aX1, p.aX2, p.aX3, p.aX4, p.at_pre, p.at_post,
                     p.b_mult, p.b0, p.bA, p.bX1, p.bX2, p.bX4, p.bt_pre, p.bt_post,
                     p.c3i, p.c3p, p.c3a, p.s3, p.c4i, p.c4p, p.s4})
      f(v);
  }
  for (double v : sc.grid.visits) f(v);
  f(sc.grid.tau);
  return h;
}

inline SubjectRecord simulate_baseline_one(const BaselineParams& p, const VisitGrid& grid,
                                           Rng& rng, const SimOptions& opts) {
  SubjectRecord s;
  s.X1 = rng.normal(p.mu1, 1.0);
  s.X2 = rng.normal(p.mu2, 1.0);
  s.X3 = rng.normal(p.mu3, 1.0);
  const int K = grid.K();
  s.A.assign(K + 1, std::nullopt);
  s.A[0] = opts.force ? static_cast<double>(opts.force->indicator(0)) : 1.0;

  double T = kInf, C = kInf;
  for (int k = 0; k <= K; ++k) {
    const double at = (k <= 2) ? p.at_pre : p.at_post;
    const double bt = (k <= 2) ? p.bt_pre : p.bt_post;
    const double Ak = *s.A[k];
    const double lamT = std::exp(p.a0 + p.aA * Ak + p.aX1 * s.X1 + p.aX2 * s.X2 + p.aX3 * s.X3 + at);
    const double lamC = opts.disable_natural_censoring
                            ? 0.0
                            : p.b_mult * std::exp(p.b0 + p.bA * Ak + p.bX2 * s.X2 + p.bX3 * s.X3 + bt);
    const double eT = rng.exponential(lamT);
    const double eC = rng.exponential(lamC);
    const double L = grid.bound(k + 1) - grid.bound(k);
    if (std::min(eT, eC) <= L) {
      if (eT <= eC) T = grid.bound(k) + eT;   // ties resolve to the event
      else          C = grid.bound(k) + eC;
      break;
    }
    if (k + 1 <= K) {
      const int kv = k + 1;
      if (opts.force) {
        s.A[kv] = static_cast<double>(opts.force->indicator(kv));
      } else {
        const double gt = (kv <= 2) ? p.gt_pre : p.gt_post;
        const double pA = expit(p.g0 + p.gA * Ak + p.gX1 * s.X1 + p.gX2 * s.X2 + gt);
        s.A[kv] = rng.bernoulli(pA);
      }
    }
  }
  s.latent_T = T;
  s.latent_C = C;
  s.T_tilde = std::min({T, C, grid.tau});
  s.event = (T <= C && T <= grid.tau) ? 1 : 0;
  return s;
}

inline SubjectRecord simulate_timedep_one(const TimedepParams& p, const VisitGrid& grid,
                                          Rng& rng, const SimOptions& opts) {
  SubjectRecord s;
  s.X1 = rng.normal(0.5, 1.0);
  s.X2 = rng.normal(1.0, 1.0);
  const int K = grid.K();
  s.X3k.assign(K + 1, std::nullopt);
  s.X4k.assign(K + 1, std::nullopt);
  s.X3k[0] = rng.normal(1.0, 1.0);
  s.X4k[0] = rng.normal(-1.0, 1.0);
  s.A.assign(K + 1, std::nullopt);
  s.A[0] = opts.force ? static_cast<double>(opts.force->indicator(0)) : 1.0;

  double T = kInf, C = kInf;
  for (int k = 0; k <= K; ++k) {
    const double at = (k <= 2) ? p.at_pre : p.at_post;
    const double bt = (k <= 3) ? p.bt_pre : p.bt_post;
    const double Ak = *s.A[k];
    const double x3 = *s.X3k[k];
    const double x4 = *s.X4k[k];
    const double lamT =
        std::exp(p.a0 + p.aA * Ak + p.aX1 * s.X1 + p.aX2 * s.X2 + p.aX3 * x3 + p.aX4 * x4 + at);
    const double lamC = opts.disable_natural_censoring
                            ? 0.0
                            : p.b_mult * std::exp(p.b0 + p.bA * Ak + p.bX1 * s.X1 +
                                                  p.bX2 * s.X2 + p.bX4 * x4 + bt);
    const double eT = rng.exponential(lamT);
    const double eC = rng.exponential(lamC);
    const double L = grid.bound(k + 1) - grid.bound(k);
    if (std::min(eT, eC) <= L) {
      if (eT <= eC) T = grid.bound(k) + eT;
      else          C = grid.bound(k) + eC;
      break;
    }
    if (k + 1 <= K) {
      const double x3n = p.c3i + p.c3p * x3 + p.c3a * Ak + rng.normal(0.0, p.s3);
      const double x4n = p.c4i + p.c4p * x4 + rng.normal(0.0, p.s4);
      s.X3k[k + 1] = x3n;
      s.X4k[k + 1] = x4n;
      if (opts.force) {
        s.A[k + 1] = static_cast<double>(opts.force->indicator(k + 1));
      } else {
        const double gt = (k <= 2) ? p.gt_pre : p.gt_post;  // indexed by origin visit
        const double pA =
            expit(p.g0 + p.gX1 * s.X1 + p.gX2 * s.X2 + p.gX3 * (0.1 * k) * x3n + p.gAp * Ak + gt);
        s.A[k + 1] = rng.bernoulli(pA);
      }
    }
  }
  s.latent_T = T;
  s.latent_C = C;
  s.T_tilde = std::min({T, C, grid.tau});
  s.event = (T <= C && T <= grid.tau) ? 1 : 0;
  return s;
}

// Simulate a cohort. Subject i draws from an independent stream keyed by
// (seed, dgp stream id, i), so results do not depend on n or iteration order.
inline std::vector<SubjectRecord> simulate(const Scenario& sc, std::int64_t n,
                                           std::uint64_t seed, const SimOptions& opts = {}) {
  std::vector<SubjectRecord> out;
  out.reserve(static_cast<std::size_t>(n));
  const std::uint64_t sid =
      sc.kind == Scenario::Kind::baseline ? stream::kBaselineDgp : stream::kTimedepDgp;
  for (std::int64_t i = 0; i < n; ++i) {
    Rng rng = Rng::for_unit(seed, sid, static_cast<std::uint64_t>(i));
    SubjectRecord s = sc.kind == Scenario::Kind::baseline
                          ? simulate_baseline_one(sc.base, sc.grid, rng, opts)
                          : simulate_timedep_one(sc.tv, sc.grid, rng, opts);
    s.id = i;
    out.push_back(std::move(s));
  }
  return out;
}

// --- scenario presets -------------------------------------------------------

inline Scenario scenario_by_name(const std::string& name) {
  Scenario sc;
  sc.name = name;
  if (name == "baseline-s1") {
    sc.kind = Scenario::Kind::baseline;
    sc.base = {1.1, 1.0, 0.2, -0.05, 0.4, -2.2,
               -2.7, -1.0, 0.1, -0.08, -0.2, -0.2, 0.3,
               0.08, -0.4, 0.05, -0.2, 0.1, 0.0, 0.0};
  } else if (name == "baseline-s2") {
    sc.kind = Scenario::Kind::baseline;
    sc.base = {1.1, 1.0, -0.5, 0.5, 0.4, -2.2,
               -2.7, -1.0, 0.5, -0.8, -0.8, -0.2, 0.3,
               0.05, -0.4, 0.05, -0.2, 0.1, 0.0, 0.0};
  } else if (name == "baseline-s3") {
    sc.kind = Scenario::Kind::baseline;
    sc.base = {1.1, 1.0, 0.2, -0.05, 0.4, -2.2,
               -1.7, -1.0, 0.1, -0.08, -0.2, -0.2, 0.3,
               0.1, -0.3, 0.5, 0.5, 0.5, -1.5, 0.5};
  } else if (name == "baseline-s4") {
    sc.kind = Scenario::Kind::baseline;
    sc.base = {1.1, 1.0, -0.5, 0.5, 0.4, -2.2,
               -2.7, -1.0, 0.5, -0.8, -0.8, -0.2, 0.3,
               0.5, -0.3, 0.3, 0.5, 0.5, -0.5, 0.5};
  } else if (name == "timedep-s1") {
    sc.kind = Scenario::Kind::timedep;
    sc.tv = {-0.1, 0.2, -0.2, -0.2, 0.65, 0.35, -0.4,
             -2.0, -0.75, -0.2, -0.08, -0.08, 0.2, -0.12, 0.18,
             0.1, -1.5, 0.0, 0.2, -0.03, -0.5, -0.35, -0.05,
             0.05, 0.15, 0.08, 0.22,
             0.05, 0.15, 0.22};
  } else if (name == "timedep-s2") {
    sc.kind = Scenario::Kind::timedep;
    sc.tv = {-0.1, 0.05, -0.05, -1.0, 0.62, 0.24, -0.5,
             -3.2, -1.35, -0.3, 0.3, 1.0, 0.7, -0.08, 0.35,
             0.08, -1.0, 0.0, 0.02, -0.02, 0.08, -0.45, -0.05,
             0.0, 0.78, 0.5, 0.18,
             0.0, 0.5, 0.22};
  } else if (name == "timedep-s3") {
    sc.kind = Scenario::Kind::timedep;
    sc.tv = {-0.55, 0.08, -0.08, 0.2, 1.0, 1.0, -0.1,
             -3.2, -1.0, -0.15, 0.15, 0.08, 1.1, -0.15, 0.2,
             0.26, -1.05, 0.2, 0.2, -0.2, 1.45, 0.45, 0.1,
             0.05, 0.7, 0.1, 0.3,
             0.0, 0.92, 0.25};
  } else if (name == "timedep-s4") {
    sc.kind = Scenario::Kind::timedep;
    sc.tv = {-1.15, 0.3, -0.3, 2.5, 1.2, 1.4, -3.0,
             -4.0, -1.1, -0.35, 0.35, 1.1, 0.85, -0.1, 0.35,
             0.28, -0.85, 0.75, 0.7, -0.9, 1.0, 0.45, 0.05,
             0.1, 0.85, 0.85, 0.25,
             0.0, 0.85, 0.35};
  } else {
    throw std::invalid_argument("unknown scenario preset: " + name);
  }
  return sc;
}

inline const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names = {
      "baseline-s1", "baseline-s2", "baseline-s3", "baseline-s4",
      "timedep-s1",  "timedep-s2",  "timedep-s3",  "timedep-s4"};
  return names;
}

// --- oracle -----------------------------------------------------------------

// True restricted mean survival (years) under strategy d: simulate with the
// rule forced and natural censoring switched off, average min(T, tau).
inline double oracle_rmst_uncached(const Scenario& sc, int d, std::uint64_t seed,
                                   std::int64_t n_mc) {
  SimOptions opts;
  opts.force = Strategy(d, sc.grid.K());
  opts.disable_natural_censoring = true;
  const std::uint64_t sid =
      sc.kind == Scenario::Kind::baseline ? stream::kBaselineDgp : stream::kTimedepDgp;
  double sum = 0.0;
  for (std::int64_t i = 0; i < n_mc; ++i) {
    Rng rng = Rng::for_unit(seed ^ (0xabcdULL * stream::kOracle), sid, static_cast<std::uint64_t>(i));
    SubjectRecord s = sc.kind == Scenario::Kind::baseline
                          ? simulate_baseline_one(sc.base, sc.grid, rng, opts)
                          : simulate_timedep_one(sc.tv, sc.grid, rng, opts);
    sum += std::min(s.latent_T, sc.grid.tau);
  }
  return sum / static_cast<double>(n_mc);
}

// Memoized oracle: repeated calls for the same (parameters, strategy, seed,
// precision) are computed once per process.
inline double oracle_rmst(const Scenario& sc, int d, std::uint64_t seed = 4242,
                          std::int64_t n_mc = 2'000'000) {
  struct Key {
    std::uint64_t ph, seed;
    int d;
    std::int64_t n_mc;
    bool operator<(const Key& o) const {
      return std::tie(ph, seed, d, n_mc) < std::tie(o.ph, o.seed, o.d, o.n_mc);
    }
  };
  static std::map<Key, double> cache;
  static std::mutex mu;
  const Key key{params_hash(sc), seed, d, n_mc};
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  const double value = oracle_rmst_uncached(sc, d, seed, n_mc);
  std::lock_guard<std::mutex> lock(mu);
  cache.emplace(key, value);
  return value;
}

}  // namespace ccw
