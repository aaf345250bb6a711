// Nuisance-model fitters: logistic and Poisson (log-exposure offset)
// regression by iteratively reweighted least squares with a small ridge on
// the normal equations, step-halving, and a separation guard.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "ccw/core.hpp"

namespace ccw {

enum class GlmFamily { logistic, poisson };

struct DesignMatrix {
  std::size_t n = 0, p = 0;
  std::vector<double> X;        // row-major n x p
  std::vector<double> y;        // {0,1} for logistic, counts for poisson
  std::vector<double> offset;   // empty = zeros (poisson: log exposure)
  std::vector<double> weights;  // case weights; empty = ones

  double x(std::size_t i, std::size_t k) const { return X[i * p + k]; }
  double off(std::size_t i) const { return offset.empty() ? 0.0 : offset[i]; }
  double w(std::size_t i) const { return weights.empty() ? 1.0 : weights[i]; }
};

struct FittedGlm {
  std::vector<double> beta;
  GlmFamily family = GlmFamily::logistic;
  bool converged = false;
  bool separation = false;
  double score_norm = kInf;  // final max |score|
  int iterations = 0;
};

namespace linalg {

// Solve (A + ridge*I) x = b in place for symmetric positive-definite A
// (row-major p x p) by Cholesky; returns false if the factorization fails.
inline bool cholesky_solve(std::vector<double> A, std::vector<double> b,
                           std::size_t p, double ridge, std::vector<double>& x) {
  for (std::size_t i = 0; i < p; ++i) A[i * p + i] += ridge;
  // decompose A = L L^T
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = A[i * p + j];
      for (std::size_t k = 0; k < j; ++k) s -= A[i * p + k] * A[j * p + k];
      if (i == j) {
        if (s <= 0.0) return false;
        A[i * p + i] = std::sqrt(s);
      } else {
        A[i * p + j] = s / A[j * p + j];
      }
    }
  }
  // forward substitution L z = b
  for (std::size_t i = 0; i < p; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= A[i * p + k] * b[k];
    b[i] = s / A[i * p + i];
  }
  // back substitution L^T x = z
  x.assign(p, 0.0);
  for (std::size_t ii = p; ii-- > 0;) {
    double s = b[ii];
    for (std::size_t k = ii + 1; k < p; ++k) s -= A[k * p + ii] * x[k];
    x[ii] = s / A[ii * p + ii];
  }
  return true;
}

}  // namespace linalg

namespace detail {

inline double glm_loglik(const DesignMatrix& d, GlmFamily fam, const std::vector<double>& beta) {
  double ll = 0.0;
  for (std::size_t i = 0; i < d.n; ++i) {
    double eta = d.off(i);
    for (std::size_t k = 0; k < d.p; ++k) eta += d.x(i, k) * beta[k];
    if (fam == GlmFamily::logistic) {
      // y*eta - log(1 + e^eta), computed stably
      const double lse = eta > 0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
      ll += d.w(i) * (d.y[i] * eta - lse);
    } else {
      ll += d.w(i) * (d.y[i] * eta - std::exp(eta));  // log(y!) omitted (constant)
    }
  }
  return ll;
}

inline void glm_score(const DesignMatrix& d, GlmFamily fam, const std::vector<double>& beta,
                      std::vector<double>& score) {
  score.assign(d.p, 0.0);
  for (std::size_t i = 0; i < d.n; ++i) {
    double eta = d.off(i);
    for (std::size_t k = 0; k < d.p; ++k) eta += d.x(i, k) * beta[k];
    const double mu = fam == GlmFamily::logistic ? expit(eta) : std::exp(eta);
    const double r = d.w(i) * (d.y[i] - mu);
    for (std::size_t k = 0; k < d.p; ++k) score[k] += r * d.x(i, k);
  }
}

}  // namespace detail

// IRLS with fixed contract: converged when max |score| <= 1e-8 or the
// relative log-likelihood change <= 1e-10; ridge 1e-8 on the normal
// equations; at most 100 iterations with step-halving; |beta| > 50 is
// treated as separation/divergence and flagged, never silent.
inline FittedGlm fit_glm(const DesignMatrix& d, GlmFamily fam) {
  constexpr double kScoreTol = 1e-8;
  constexpr double kRelTol = 1e-10;
  constexpr double kRidge = 1e-8;
  constexpr double kBetaGuard = 50.0;
  constexpr int kMaxIter = 100;

  if (d.n == 0) throw std::invalid_argument("empty design matrix");
  FittedGlm fit;
  fit.family = fam;
  fit.beta.assign(d.p, 0.0);

  // Degenerate responses put the MLE at infinity along the intercept; with
  // the ridge the iteration would stall at a huge-but-finite coefficient, so
  // flag divergence up front instead of reporting a silent pseudo-optimum.
  {
    double sy = 0.0, sw = 0.0;
    for (std::size_t i = 0; i < d.n; ++i) {
      sy += d.w(i) * d.y[i];
      sw += d.w(i);
    }
    const bool degenerate = fam == GlmFamily::poisson ? sy == 0.0 : (sy == 0.0 || sy == sw);
    if (degenerate) {
      fit.separation = true;
      fit.converged = false;
      return fit;
    }
  }

  std::vector<double> score, H(d.p * d.p), step, cand(d.p);
  double ll = detail::glm_loglik(d, fam, fit.beta);
  int stalled = 0;

  for (int it = 1; it <= kMaxIter; ++it) {
    fit.iterations = it;
    detail::glm_score(d, fam, fit.beta, score);
    double sn = 0.0;
    for (double s : score) sn = std::max(sn, std::abs(s));
    fit.score_norm = sn;
    if (sn <= kScoreTol) {
      fit.converged = true;
      break;
    }
    // expected information X^T W X
    std::fill(H.begin(), H.end(), 0.0);
    for (std::size_t i = 0; i < d.n; ++i) {
      double eta = d.off(i);
      for (std::size_t k = 0; k < d.p; ++k) eta += d.x(i, k) * fit.beta[k];
      const double mu = fam == GlmFamily::logistic ? expit(eta) : std::exp(eta);
      const double wi = d.w(i) * (fam == GlmFamily::logistic ? mu * (1.0 - mu) : mu);
      for (std::size_t a = 0; a < d.p; ++a) {
        const double xa = d.x(i, a) * wi;
        for (std::size_t b = a; b < d.p; ++b) H[a * d.p + b] += xa * d.x(i, b);
      }
    }
    for (std::size_t a = 0; a < d.p; ++a)
      for (std::size_t b = 0; b < a; ++b) H[a * d.p + b] = H[b * d.p + a];

    if (!linalg::cholesky_solve(H, score, d.p, kRidge, step)) break;

    // Step-halving: accept the first step that does not decrease the
    // log-likelihood. The slack scales with |ll| because near the optimum the
    // true gain of the last Newton step sits below the rounding noise of the
    // summed log-likelihood, and a noise-level dip must not veto the step
    // that drives the score to its tolerance.
    const double slack = 1e-12 * (std::abs(ll) + 1.0);
    double scale = 1.0;
    double ll_new = -kInf;
    for (int h = 0; h < 30; ++h, scale *= 0.5) {
      for (std::size_t k = 0; k < d.p; ++k) cand[k] = fit.beta[k] + scale * step[k];
      ll_new = detail::glm_loglik(d, fam, cand);
      if (ll_new >= ll - slack) break;
    }
    fit.beta = cand;

    double bmax = 0.0;
    for (double b : fit.beta) bmax = std::max(bmax, std::abs(b));
    if (bmax > kBetaGuard) {
      fit.separation = true;
      fit.converged = false;
      detail::glm_score(d, fam, fit.beta, score);
      fit.score_norm = 0.0;
      for (double s : score) fit.score_norm = std::max(fit.score_norm, std::abs(s));
      return fit;
    }

    // A single stalled step can occur one Newton update before the score
    // criterion lands, so the plateau only counts when it persists; that way
    // well-conditioned fits still finish through the score test above.
    if (std::abs(ll_new - ll) <= kRelTol * (std::abs(ll) + 1.0)) {
      if (++stalled >= 2) {
        ll = ll_new;
        detail::glm_score(d, fam, fit.beta, score);
        fit.score_norm = 0.0;
        for (double s : score) fit.score_norm = std::max(fit.score_norm, std::abs(s));
        fit.converged = true;
        break;
      }
    } else {
      stalled = 0;
    }
    ll = ll_new;
  }
  return fit;
}

inline FittedGlm fit_logistic(const DesignMatrix& d) { return fit_glm(d, GlmFamily::logistic); }
inline FittedGlm fit_poisson_offset(const DesignMatrix& d) { return fit_glm(d, GlmFamily::poisson); }

inline double linear_predictor(const FittedGlm& fit, const std::vector<double>& features) {
  if (features.size() != fit.beta.size()) throw std::invalid_argument("feature length mismatch");
  double eta = 0.0;
  for (std::size_t k = 0; k < features.size(); ++k) eta += features[k] * fit.beta[k];
  return eta;
}

inline double predict_logit(const FittedGlm& fit, const std::vector<double>& features) {
  return expit(linear_predictor(fit, features));
}

}  // namespace ccw
