// Hazard models on the visit grid: piecewise-exponential fits (Poisson with
// log-exposure offset, interval-specific intercepts) with closed-form
// survival / restricted-mean / residual-life functionals, and a Weibull
// proportional-hazards fitter used as a misspecification probe.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <numbers>
#include <vector>

#include "ccw/core.hpp"
#include "ccw/glm.hpp"
#include "ccw/panel.hpp"

namespace ccw {

// Nodes and weights of n-point Gauss-Legendre quadrature on [-1, 1],
// computed once per order by Newton iteration on the Legendre recurrence.
inline const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre(int n) {
  static std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::vector<double> x(n), w(n);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      const double z1 = z;
      z = z1 - p0 / pp;
      if (std::abs(z - z1) < 1e-15) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    w[n - 1 - i] = w[i];
  }
  return cache.emplace(n, std::make_pair(std::move(x), std::move(w))).first->second;
}

// --- closed forms for a per-interval-constant hazard schedule ---------------
// lam[j-1] is the hazard on interval j = (bound(j-1), bound(j)].

inline double pwexp_cumhaz(const std::vector<double>& lam, const VisitGrid& grid, double t) {
  double H = 0.0;
  const int J = grid.n_intervals();
  for (int j = 1; j <= J; ++j) {
    const double a = grid.bound(j - 1), b = grid.bound(j);
    if (t <= a) break;
    H += lam[j - 1] * (std::min(t, b) - a);
  }
  return H;
}

inline double pwexp_survival(const std::vector<double>& lam, const VisitGrid& grid, double t) {
  return std::exp(-pwexp_cumhaz(lam, grid, t));
}

// Exact integral of survival from 0 to t.
inline double pwexp_surv_integral(const std::vector<double>& lam, const VisitGrid& grid, double t) {
  double acc = 0.0, logS = 0.0;
  const int J = grid.n_intervals();
  for (int j = 1; j <= J; ++j) {
    const double a = grid.bound(j - 1), b = grid.bound(j);
    if (t <= a) break;
    const double len = std::min(t, b) - a;
    const double l = lam[j - 1];
    const double S0 = std::exp(logS);
    acc += l > 0.0 ? S0 * (1.0 - std::exp(-l * len)) / l : S0 * len;
    logS -= l * len;
  }
  return acc;
}

inline double pwexp_rmst(const std::vector<double>& lam, const VisitGrid& grid) {
  return pwexp_surv_integral(lam, grid, grid.tau);
}

// Expected time lived by horizon tau given survival to t:
// Q(t) = t + integral_t^tau S(u) du / S(t); Q(tau) = tau.
inline double pwexp_Q(const std::vector<double>& lam, const VisitGrid& grid, double t) {
  if (t >= grid.tau) return grid.tau;
  const double St = pwexp_survival(lam, grid, t);
  if (St <= 0.0) throw EstimationError("residual life undefined: S(t|x) = 0");
  const double tail = pwexp_surv_integral(lam, grid, grid.tau) - pwexp_surv_integral(lam, grid, t);
  return t + tail / St;
}

// --- piecewise-exponential regression fit ------------------------------------

// Hazard lambda(t|x) = exp(alpha_j + theta^T x) on interval j. Intervals with
// no response events get no direct intercept: outcome models carry the
// nearest earlier fitted intercept forward (0 before the first, flagged);
// censoring models use hazard 0 there.
struct PwexpFit {
  int J = 0;
  std::vector<double> alpha;           // resolved per-interval intercepts
  std::vector<bool> interval_fitted;   // direct data support
  std::vector<double> theta;
  bool zero_unfitted = true;           // censor-model policy
  bool carried = false;                // outcome policy used carry-forward
  bool converged = false;

  double rate(int j, const std::vector<double>& covs) const {
    if (zero_unfitted && !interval_fitted[static_cast<std::size_t>(j - 1)]) return 0.0;
    double eta = alpha[static_cast<std::size_t>(j - 1)];
    for (std::size_t k = 0; k < theta.size(); ++k) eta += theta[k] * covs[k];
    return std::exp(eta);
  }

  std::vector<double> rate_schedule(const std::vector<double>& covs) const {
    std::vector<double> lam(static_cast<std::size_t>(J));
    for (int j = 1; j <= J; ++j) lam[static_cast<std::size_t>(j - 1)] = rate(j, covs);
    return lam;
  }
};

enum class PwexpRole { outcome, censor };

// Fits on person-period rows; `response` selects the indicator column.
// Only intervals containing at least one response event receive a dummy and
// contribute rows to the likelihood.
inline PwexpFit fit_pwexp(const std::vector<PersonPeriodRow>& rows, int J,
                          const std::function<int(const PersonPeriodRow&)>& response,
                          PwexpRole role) {
  std::vector<char> has_event(static_cast<std::size_t>(J), 0);
  for (const auto& r : rows)
    if (response(r) == 1) has_event[static_cast<std::size_t>(r.j - 1)] = 1;
  std::vector<int> js;
  std::vector<int> dummy_index(static_cast<std::size_t>(J), -1);
  for (int j = 1; j <= J; ++j)
    if (has_event[static_cast<std::size_t>(j - 1)]) {
      dummy_index[static_cast<std::size_t>(j - 1)] = static_cast<int>(js.size());
      js.push_back(j);
    }

  PwexpFit fit;
  fit.J = J;
  fit.zero_unfitted = role == PwexpRole::censor;
  fit.interval_fitted.assign(static_cast<std::size_t>(J), false);
  fit.alpha.assign(static_cast<std::size_t>(J), -kInf);
  if (js.empty()) {
    // no events anywhere: zero hazard (censor) / flagged empty fit (outcome)
    if (role == PwexpRole::outcome) throw EstimationError("outcome model has no events");
    fit.converged = true;
    return fit;
  }

  const std::size_t ncov = rows.front().covs.size();
  DesignMatrix d;
  d.p = js.size() + ncov;
  for (const auto& r : rows) {
    const int di = dummy_index[static_cast<std::size_t>(r.j - 1)];
    if (di < 0) continue;
    for (std::size_t c = 0; c < js.size(); ++c)
      d.X.push_back(c == static_cast<std::size_t>(di) ? 1.0 : 0.0);
    for (double v : r.covs) d.X.push_back(v);
    d.y.push_back(response(r));
    d.offset.push_back(std::log(r.t_stop - r.t_start));
    ++d.n;
  }
  const FittedGlm glm = fit_poisson_offset(d);
  fit.converged = glm.converged;
  fit.theta.assign(glm.beta.begin() + static_cast<std::ptrdiff_t>(js.size()), glm.beta.end());
  for (std::size_t c = 0; c < js.size(); ++c) {
    fit.alpha[static_cast<std::size_t>(js[c] - 1)] = glm.beta[c];
    fit.interval_fitted[static_cast<std::size_t>(js[c] - 1)] = true;
  }
  if (role == PwexpRole::outcome) {
    double carry = 0.0;  // default intercept before the first fitted interval
    for (int j = 1; j <= J; ++j) {
      if (fit.interval_fitted[static_cast<std::size_t>(j - 1)]) {
        carry = fit.alpha[static_cast<std::size_t>(j - 1)];
      } else {
        fit.alpha[static_cast<std::size_t>(j - 1)] = carry;
        fit.carried = true;
      }
    }
  }
  return fit;
}

// --- Weibull proportional hazards ---------------------------------------------

// Cumulative hazard H(t|x) = exp(la + p*log t + theta^T x) with p = exp(lp);
// fitted by Newton with step clipping and a small ridge.
struct WeibullFit {
  double log_lam0 = 0.0, log_shape = 0.0;
  std::vector<double> theta;
  bool converged = false;
  int iterations = 0;
  double score_norm = kInf;

  double shape() const { return std::exp(log_shape); }
  double cumhaz(double t, const std::vector<double>& covs) const {
    double eta = log_lam0 + shape() * std::log(t);
    for (std::size_t k = 0; k < theta.size(); ++k) eta += theta[k] * covs[k];
    return std::exp(eta);
  }
  double survival(double t, const std::vector<double>& covs) const {
    return t <= 0.0 ? 1.0 : std::exp(-cumhaz(t, covs));
  }
};

inline WeibullFit fit_weibull(const std::vector<double>& times, const std::vector<int>& events,
                              const std::vector<std::vector<double>>& covs,
                              bool fix_shape = false) {
  const std::size_t n = times.size();
  std::size_t nev = 0;
  double exposure = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    nev += static_cast<std::size_t>(events[i]);
    exposure += times[i];
  }
  if (nev < 2) throw std::invalid_argument("weibull fit requires at least 2 events");
  const std::size_t ncov = covs.empty() ? 0 : covs.front().size();
  const std::size_t p = 2 + ncov;  // la, lp, theta (lp frozen when fix_shape)

  std::vector<double> beta(p, 0.0);
  beta[0] = std::log(static_cast<double>(nev) / exposure);

  WeibullFit fit;
  std::vector<double> lt(n);
  for (std::size_t i = 0; i < n; ++i) lt[i] = std::log(std::max(times[i], 1e-300));

  std::vector<double> grad(p), step, Hmat(p * p);
  for (int it = 1; it <= 200; ++it) {
    fit.iterations = it;
    const double shp = std::exp(beta[1]);
    std::fill(grad.begin(), grad.end(), 0.0);
    std::fill(Hmat.begin(), Hmat.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double eta = beta[0] + shp * lt[i];
      for (std::size_t k = 0; k < ncov; ++k) eta += beta[2 + k] * covs[i][k];
      const double H = std::exp(eta);
      const double d = events[i];
      const double plt = shp * lt[i];
      grad[0] += d - H;
      grad[1] += d * (1.0 + plt) - H * plt;
      for (std::size_t k = 0; k < ncov; ++k) grad[2 + k] += covs[i][k] * (d - H);
      // negative Hessian (observed information)
      Hmat[0 * p + 0] += H;
      Hmat[0 * p + 1] += H * plt;
      Hmat[1 * p + 1] += H * plt * (plt + 1.0) - d * plt;
      for (std::size_t k = 0; k < ncov; ++k) {
        Hmat[0 * p + (2 + k)] += H * covs[i][k];
        Hmat[1 * p + (2 + k)] += H * plt * covs[i][k];
        for (std::size_t l = k; l < ncov; ++l)
          Hmat[(2 + k) * p + (2 + l)] += H * covs[i][k] * covs[i][l];
      }
    }
    if (fix_shape) {
      grad[1] = 0.0;
      for (std::size_t k = 0; k < p; ++k) Hmat[1 * p + k] = Hmat[k * p + 1] = 0.0;
      Hmat[1 * p + 1] = 1.0;
    }
    for (std::size_t a = 0; a < p; ++a)
      for (std::size_t b = 0; b < a; ++b) Hmat[a * p + b] = Hmat[b * p + a];

    double gn = 0.0;
    for (double g : grad) gn = std::max(gn, std::abs(g));
    fit.score_norm = gn;
    if (gn <= 1e-8) {
      fit.converged = true;
      break;
    }
    if (!linalg::cholesky_solve(Hmat, grad, p, 1e-9, step)) break;
    for (std::size_t k = 0; k < p; ++k)
      beta[k] += std::clamp(step[k], -2.0, 2.0);
  }
  fit.log_lam0 = beta[0];
  fit.log_shape = fix_shape ? 0.0 : beta[1];
  fit.theta.assign(beta.begin() + 2, beta.end());
  return fit;
}

// Restricted mean by 64-point Gauss-Legendre on [0, tau].
inline double weibull_rmst(const WeibullFit& fit, const std::vector<double>& covs, double tau) {
  const auto& [x, w] = gauss_legendre(64);
  double acc = 0.0;
  for (std::size_t q = 0; q < x.size(); ++q) {
    const double t = 0.5 * tau * (x[q] + 1.0);
    acc += w[q] * fit.survival(t, covs);
  }
  return 0.5 * tau * acc;
}

}  // namespace ccw
