// Censoring-weight trajectories, the discrete stay model, and weighted
// Kaplan-Meier estimation.
#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "ccw/clone.hpp"
#include "ccw/dgp.hpp"
#include "ccw/km.hpp"
#include "ccw/rng.hpp"
#include "ccw/toy.hpp"
#include "ccw/weights.hpp"

using namespace ccw;

namespace {

const VisitGrid kGrid({0, 1, 2, 3, 4}, 10.0);

WeightTrajectory make_trajectory(std::vector<double> p_stay, std::vector<double> lam) {
  WeightTrajectory tr;
  tr.p_stay_art = std::move(p_stay);
  tr.lam_nat = std::move(lam);
  tr.finalize(kGrid);
  return tr;
}

}  // namespace

TEST_CASE("natural-censoring weight accrues continuously") {
  const auto flat = make_trajectory(std::vector<double>(5, 1.0), std::vector<double>(5, 0.1));
  CHECK(flat.W(0.0, kGrid) == 1.0);
  CHECK(flat.W(2.0, kGrid) == Catch::Approx(std::exp(0.2)).margin(1e-7));  // 1.2214
  CHECK(flat.W(2.0, kGrid) == Catch::Approx(1.2214).margin(1e-4));

  const auto zero = make_trajectory(std::vector<double>(5, 1.0), std::vector<double>(5, 0.0));
  for (double t : {0.0, 0.7, 1.0, 3.2, 9.9}) CHECK(zero.W(t, kGrid) == 1.0);

  // lam = (0.1, 0.3, ...): survivor function at 1.5 is exp(-0.25)
  auto two = make_trajectory(std::vector<double>(5, 1.0), {0.1, 0.3, 0.0, 0.0, 0.0});
  CHECK(two.W(1.5, kGrid) == Catch::Approx(std::exp(0.25)).margin(1e-9));
}

TEST_CASE("artificial and natural factors combine multiplicatively") {
  const auto art = make_trajectory({0.8, 1, 1, 1, 1}, std::vector<double>(5, 0.0));
  const auto nat = make_trajectory(std::vector<double>(5, 1.0), std::vector<double>(5, 0.1));
  CHECK(art.W(2.0, kGrid) == Catch::Approx(1.25));
  const auto both = combine_weights(art, nat, kGrid);
  CHECK(both.W(2.0, kGrid) == Catch::Approx(1.25 * std::exp(0.2)).margin(1e-7));
  CHECK(both.W(2.0, kGrid) == Catch::Approx(1.5268).margin(2e-4));

  const auto survive55 = make_trajectory({0.55, 1, 1, 1, 1}, std::vector<double>(5, 0.0));
  CHECK(survive55.W(1.5, kGrid) == Catch::Approx(1.0 / 0.55).margin(1e-9));
  CHECK(survive55.W(1.5, kGrid) == Catch::Approx(1.818).margin(1e-3));
}

TEST_CASE("uninformative stay model halves at every check") {
  // all-zero coefficients: each checked interval contributes stay probability
  // one half, so the weight after the j-th check is 2^j
  DiscreteStayModel m;
  m.dummy = {0, 1, 2, 3, 4};
  m.n_dummies = 5;
  m.beta.assign(5, 0.0);
  for (int j = 1; j <= 5; ++j) CHECK(m.p_event(j, {}) == 0.5);

  const auto tr = make_trajectory(std::vector<double>(5, 0.5), std::vector<double>(5, 0.0));
  for (int j = 0; j < 5; ++j)
    CHECK(tr.W(kGrid.bound(j) + 0.5 * 0.1, kGrid) == Catch::Approx(std::pow(2.0, j)));

  DiscreteStayModel quiet;
  quiet.dummy = {-1, -1};
  CHECK(quiet.p_event(1, {}) == 0.0);  // no events: stay probability 1
}

TEST_CASE("weights start at one and never decrease") {
  Rng rng = Rng::for_unit(71, 1, 0);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> p(5), l(5);
    for (int j = 0; j < 5; ++j) {
      p[static_cast<std::size_t>(j)] = 0.5 + 0.5 * rng.uniform();
      l[static_cast<std::size_t>(j)] = 0.5 * rng.uniform();
    }
    const auto tr = make_trajectory(p, l);
    CHECK(tr.W(0.0, kGrid) == 1.0);
    double w_prev = 1.0;
    for (int i = 1; i <= 100; ++i) {
      const double w = tr.W(0.0999 * i, kGrid);
      CHECK(w >= w_prev - 1e-12);
      w_prev = w;
    }
  }
}

TEST_CASE("truncation caps extreme weights only when enabled") {
  auto tr = make_trajectory(std::vector<double>(5, 0.05), std::vector<double>(5, 1.0));
  CHECK(tr.W(9.0, kGrid) > 1e3);  // untruncated by default
  tr.cap = 1e3;
  CHECK(tr.W(9.0, kGrid) == 1e3);
  CHECK(tr.W(0.0, kGrid) == 1.0);  // cap never lifts small weights
}

TEST_CASE("discrete stay model recovers empirical censoring fractions") {
  std::vector<PersonPeriodRow> rows;
  auto add = [&rows](int j, int art, int copies) {
    for (int i = 0; i < copies; ++i) {
      PersonPeriodRow r;
      r.j = j;
      r.t_start = j - 1.0;
      r.t_stop = j;
      r.art_censor = art;
      rows.push_back(r);
    }
  };
  add(1, 1, 10);
  add(1, 0, 30);
  add(2, 1, 8);
  add(2, 0, 8);
  const auto m = fit_discrete_stay(
      rows, 5, [](const PersonPeriodRow& r) { return r.art_censor; }, {});
  REQUIRE(m.converged);
  CHECK(m.p_event(1, {}) == Catch::Approx(0.25).margin(1e-7));
  CHECK(m.p_event(2, {}) == Catch::Approx(0.5).margin(1e-7));
  CHECK(m.p_event(3, {}) == 0.0);  // no events in that interval

  CHECK_THROWS_AS(column_indices({"X9"}, {"X1", "X2"}), std::invalid_argument);
}

TEST_CASE("fitted trajectories are unit weights on a censoring-free panel") {
  const auto sc = scenario_by_name("baseline-s1");
  SimOptions opts;
  opts.force = Strategy(3, 4);
  opts.disable_natural_censoring = true;
  const auto subjects = simulate(sc, 300, 2024, opts);
  const auto clones = clone_arm(subjects, Strategy(3, 4), DeviationConvention::at_visit, sc.grid);
  const std::vector<std::string> covs = {"X1", "X2", "X3"};
  const auto rows = expand_visits(clones, subjects, sc.grid, CovariateSpec{covs});

  CensorModelConfig cfg;
  cfg.art_covs = {"X1", "X2"};
  cfg.nat_covs = {"X2", "X3"};
  const auto ws = fitted_trajectories(rows, clones.size(), covs, cfg, sc.grid);
  REQUIRE(ws.size() == clones.size());
  for (const auto& tr : ws)
    for (double t : {0.5, 2.5, 6.0, 9.5}) CHECK(tr.W(t, sc.grid) == 1.0);

  CensorModelConfig capped = cfg;
  capped.truncate = true;
  CHECK(fitted_trajectories(rows, clones.size(), covs, capped, sc.grid)[0].cap == 1e3);
}

TEST_CASE("toy weighted survival anchors") {
  const auto km = toy_km_example();
  CHECK(km.surv0_at_15 == Catch::Approx(2.0 / 3.0));
  CHECK(km.rmst0 == Catch::Approx(2.5).margin(1e-12));
  CHECK(km.surv1_at_25 == Catch::Approx(0.4074).margin(5e-4));
  CHECK(km.rmst1 == Catch::Approx(2.7035).margin(1e-3));
  CHECK(km.contrast == Catch::Approx(0.2035).margin(1e-3));
}

TEST_CASE("unit-weight product-limit equivalence on random datasets") {
  Rng rng = Rng::for_unit(72, 1, 0);
  for (int rep = 0; rep < 100; ++rep) {
    const int n = 5 + static_cast<int>(rng.uniform() * 40);
    std::vector<KmEntry> entries;
    std::vector<double> t(static_cast<std::size_t>(n));
    std::vector<int> ev(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      t[static_cast<std::size_t>(i)] = 0.1 + 4.9 * rng.uniform();
      if (rng.uniform() < 0.3)  // force ties sometimes, keeping times positive
        t[static_cast<std::size_t>(i)] =
            std::max(0.25, std::round(t[static_cast<std::size_t>(i)] * 4.0) / 4.0);
      ev[static_cast<std::size_t>(i)] = rng.uniform() < 0.6 ? 1 : 0;
      entries.push_back({0.0, t[static_cast<std::size_t>(i)], ev[static_cast<std::size_t>(i)], 1.0});
    }
    const auto curve = weighted_km(entries);

    // independent textbook product-limit computation
    std::vector<double> utimes;
    for (int i = 0; i < n; ++i)
      if (ev[static_cast<std::size_t>(i)] == 1) utimes.push_back(t[static_cast<std::size_t>(i)]);
    std::sort(utimes.begin(), utimes.end());
    utimes.erase(std::unique(utimes.begin(), utimes.end()), utimes.end());
    double S = 1.0;
    for (double u : utimes) {
      int d = 0, Y = 0;
      for (int i = 0; i < n; ++i) {
        if (t[static_cast<std::size_t>(i)] >= u) ++Y;
        if (ev[static_cast<std::size_t>(i)] == 1 && t[static_cast<std::size_t>(i)] == u) ++d;
      }
      S *= 1.0 - static_cast<double>(d) / static_cast<double>(Y);
      CHECK(curve.value(u) == Catch::Approx(S).margin(1e-12));
    }
    const double m = rmst(curve, 5.0);
    CHECK(m >= 0.0);
    CHECK(m <= 5.0);
  }
}

TEST_CASE("common weight rescaling leaves the curve unchanged") {
  Rng rng = Rng::for_unit(72, 2, 0);
  std::vector<KmEntry> base;
  for (int i = 0; i < 60; ++i) {
    const double t = 0.2 + 4.0 * rng.uniform();
    base.push_back({0.0, t, rng.uniform() < 0.5 ? 1 : 0, 0.5 + 2.0 * rng.uniform()});
  }
  auto scaled = base;
  for (auto& e : scaled) e.weight *= 37.5;
  const auto a = weighted_km(base);
  const auto b = weighted_km(scaled);
  REQUIRE(a.times.size() == b.times.size());
  for (std::size_t k = 0; k < a.times.size(); ++k) {
    CHECK(a.times[k] == b.times[k]);
    CHECK(a.surv[k] == Catch::Approx(b.surv[k]).epsilon(1e-12));
  }
}

TEST_CASE("segment form and trajectory form of the weighted estimator agree") {
  const auto sc = scenario_by_name("baseline-s4");
  const auto subjects = simulate(sc, 400, 777);
  const auto clones = clone_arm(subjects, Strategy(3, 4), DeviationConvention::at_visit, sc.grid);

  Rng rng = Rng::for_unit(72, 3, 0);
  std::vector<WeightTrajectory> ws;
  for (std::size_t i = 0; i < clones.size(); ++i) {
    std::vector<double> p(5), l(5);
    for (int j = 0; j < 5; ++j) {
      p[static_cast<std::size_t>(j)] = 0.6 + 0.4 * rng.uniform();
      l[static_cast<std::size_t>(j)] = 0.2 * rng.uniform();
    }
    WeightTrajectory tr;
    tr.p_stay_art = p;
    tr.lam_nat = l;
    tr.finalize(sc.grid);
    ws.push_back(std::move(tr));
  }
  const auto direct = weighted_km_clones(clones, ws, sc.grid);

  // refine each clone's follow-up at every event time and evaluate the weight
  // at segment ends
  std::vector<double> etimes;
  for (const auto& c : clones)
    if (c.delta_d == 1) etimes.push_back(c.T_tilde_d);
  std::sort(etimes.begin(), etimes.end());
  etimes.erase(std::unique(etimes.begin(), etimes.end()), etimes.end());

  std::vector<KmEntry> entries;
  for (std::size_t i = 0; i < clones.size(); ++i) {
    double prev = 0.0;
    for (double u : etimes) {
      if (u > clones[i].T_tilde_d) break;
      entries.push_back({prev, u,
                         clones[i].delta_d == 1 && clones[i].T_tilde_d == u ? 1 : 0,
                         ws[i].W(u, sc.grid)});
      prev = u;
    }
  }
  const auto refined = weighted_km(entries);
  REQUIRE(direct.times.size() == refined.times.size());
  for (std::size_t k = 0; k < direct.times.size(); ++k)
    CHECK(direct.surv[k] == Catch::Approx(refined.surv[k]).epsilon(1e-10));
}

TEST_CASE("restricted mean of a step curve stays inside the horizon") {
  StepSurvival s;
  s.times = {1.0, 2.0};
  s.surv = {0.5, 0.25};
  CHECK(s.value(0.5) == 1.0);
  CHECK(s.value(1.0) == 0.5);
  CHECK(s.value(5.0) == 0.25);
  CHECK(rmst(s, 3.0) == Catch::Approx(1.0 + 0.5 + 0.25));
  CHECK(rmst(s, 1.0) == Catch::Approx(1.0));  // cut before the first drop
  CHECK_THROWS_AS(rmst(s, 0.0), std::invalid_argument);

  CHECK_THROWS_AS(weighted_km({{0.0, 1.0, 1, 0.0}}), std::invalid_argument);  // weight <= 0
}

TEST_CASE("oracle weights restore the uncensored risk set on average") {
  const auto sc = scenario_by_name("baseline-s1");
  const std::int64_t n = 50000;
  const auto subjects = simulate(sc, n, 31415);
  const Strategy g(3, 4);
  const auto conv = DeviationConvention::at_visit;
  const auto clones = clone_arm(subjects, g, conv, sc.grid);
  const auto ws = true_baseline_trajectories(subjects, clones, sc.base, conv, sc.grid);

  // counterfactual survivor fraction from an independent forced run
  SimOptions opts;
  opts.force = g;
  opts.disable_natural_censoring = true;
  const auto forced = simulate(sc, 200000, 27182, opts);

  for (double t : {2.5, 3.5, 6.0}) {
    double sum = 0.0, sumsq = 0.0;
    for (std::size_t i = 0; i < clones.size(); ++i) {
      const double z = clones[i].T_tilde_d >= t ? ws[i].W(t, sc.grid) : 0.0;
      sum += z;
      sumsq += z * z;
    }
    const double mean_w = sum / static_cast<double>(n);
    const double var_w =
        (sumsq / static_cast<double>(n) - mean_w * mean_w) / static_cast<double>(n);

    std::int64_t alive = 0;
    for (const auto& s : forced) alive += std::min(s.latent_T, sc.grid.tau) >= t ? 1 : 0;
    const double p = static_cast<double>(alive) / 200000.0;
    const double var_p = p * (1.0 - p) / 200000.0;

    const double tol = 3.0 * std::sqrt(var_w + var_p);
    INFO("t=" << t << " weighted=" << mean_w << " oracle=" << p << " tol=" << tol);
    CHECK(std::abs(mean_w - p) <= tol);
  }
}
