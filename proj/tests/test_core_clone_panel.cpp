// Visit grid, strategies, cloning, support diagnostics, and person-period
// panel construction.
#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "ccw/clone.hpp"
#include "ccw/core.hpp"
#include "ccw/panel.hpp"
#include "ccw/rng.hpp"
#include "ccw/toy.hpp"

using namespace ccw;

TEST_CASE("visit grid validation and interval arithmetic") {
  CHECK_THROWS_AS(VisitGrid({1.0, 2.0}, 10.0), std::invalid_argument);   // must start at 0
  CHECK_THROWS_AS(VisitGrid({0.0, 2.0, 2.0}, 10.0), std::invalid_argument);
  CHECK_THROWS_AS(VisitGrid({0.0, 2.0}, 2.0), std::invalid_argument);    // tau beyond last visit

  const VisitGrid g({0, 1, 2, 3, 4}, 10.0);
  CHECK(g.K() == 4);
  CHECK(g.n_intervals() == 5);
  CHECK(g.bound(0) == 0.0);
  CHECK(g.bound(4) == 4.0);
  CHECK(g.bound(5) == 10.0);
  CHECK(g.interval_length(5) == 6.0);

  CHECK(g.interval_of(0.0) == 1);   // 0 maps into the first interval
  CHECK(g.interval_of(0.5) == 1);
  CHECK(g.interval_of(1.0) == 1);   // boundaries belong to the interval ending there
  CHECK(g.interval_of(1.0000001) == 2);
  CHECK(g.interval_of(4.0) == 4);
  CHECK(g.interval_of(7.3) == 5);
  CHECK(g.interval_of(10.0) == 5);
}

TEST_CASE("strategy indicator: treat strictly before the stop visit") {
  const Strategy g3(3, 4);
  for (int k = 0; k <= 4; ++k) CHECK(g3.indicator(k) == (k < 3 ? 1 : 0));
  const Strategy never_stop(5, 4);
  for (int k = 0; k <= 4; ++k) CHECK(never_stop.indicator(k) == 1);
}

TEST_CASE("toy cloning table under both deviation conventions") {
  const auto t = toy_clone_table();
  REQUIRE(t.end_of_interval.size() == 6);
  REQUIRE(t.at_visit.size() == 6);

  // order: stop-early arm over subjects 1..3, then always-treat arm
  struct Want {
    double G, Td;
    int delta, art;
  };
  const Want eoi[6] = {{kInf, 1.5, 1, 0}, {2.0, 2.0, 0, 1}, {2.0, 2.0, 0, 1},
                       {2.0, 1.5, 1, 0}, {3.0, 2.5, 1, 0}, {kInf, 3.0, 0, 0}};
  const Want atv[6] = {{kInf, 1.5, 1, 0}, {1.0, 1.0, 0, 1}, {1.0, 1.0, 0, 1},
                       {1.0, 1.0, 0, 1}, {2.0, 2.0, 0, 1}, {kInf, 3.0, 0, 0}};
  for (int i = 0; i < 6; ++i) {
    const auto& ce = t.end_of_interval[static_cast<std::size_t>(i)];
    CHECK(ce.G == eoi[i].G);
    CHECK(ce.T_tilde_d == eoi[i].Td);
    CHECK(ce.delta_d == eoi[i].delta);
    CHECK(ce.artificially_censored == (eoi[i].art == 1));
    CHECK_FALSE(ce.naturally_censored);  // only admin truncation at tau in the toy data
    const auto& ca = t.at_visit[static_cast<std::size_t>(i)];
    CHECK(ca.G == atv[i].G);
    CHECK(ca.T_tilde_d == atv[i].Td);
    CHECK(ca.delta_d == atv[i].delta);
    CHECK(ca.artificially_censored == (atv[i].art == 1));
  }
}

TEST_CASE("clone invariants on random subjects") {
  const VisitGrid grid({0, 1, 2, 3, 4}, 10.0);
  Rng rng = Rng::for_unit(52, 11, 0);
  std::vector<SubjectRecord> subjects;
  for (int i = 0; i < 400; ++i) {
    SubjectRecord s;
    s.id = i;
    for (int k = 0; k <= 4; ++k) {
      if (rng.uniform() < 0.85)
        s.A.push_back(rng.uniform() < 0.5 ? 1.0 : 0.0);
      else
        s.A.push_back(std::nullopt);
    }
    s.A[0] = 1.0;
    s.T_tilde = 0.05 + 9.95 * rng.uniform();
    s.event = rng.uniform() < 0.6 ? 1 : 0;
    if (s.event == 0 && rng.uniform() < 0.3) s.T_tilde = 10.0;  // admin truncation
    subjects.push_back(s);
  }
  for (auto conv : {DeviationConvention::end_of_interval, DeviationConvention::at_visit}) {
    for (int d : {1, 3, 5}) {
      const auto clones = clone_arm(subjects, Strategy(d, 4), conv, grid);
      REQUIRE(clones.size() == subjects.size());
      for (const auto& c : clones) {
        const auto& s = subjects[static_cast<std::size_t>(c.subject_index)];
        CHECK(c.T_tilde_d == std::min(s.T_tilde, c.G));
        if (c.delta_d == 1) {
          CHECK(s.event == 1);
          CHECK(s.T_tilde <= c.G);  // events win ties against artificial censoring
          CHECK_FALSE(c.artificially_censored);
        }
        if (c.artificially_censored) {
          CHECK(c.delta_d == 0);
          CHECK(c.G <= s.T_tilde);
        }
        if (c.naturally_censored) {
          CHECK(c.delta_d == 0);
          CHECK_FALSE(c.artificially_censored);
          CHECK(s.T_tilde < grid.tau);
        }
        // exactly one terminal state, or administrative survival to tau / G beyond follow-up
        CHECK((c.delta_d + (c.artificially_censored ? 1 : 0) + (c.naturally_censored ? 1 : 0)) <= 1);
      }
    }
  }
}

TEST_CASE("support diagnostics on the toy stop-early arm") {
  const VisitGrid grid = toy_grid();
  const auto subjects = toy_subjects();
  const auto clones =
      clone_arm(subjects, toy_stop_early(), DeviationConvention::end_of_interval, grid);
  const auto diag = support_diagnostics(clones, grid, 5);
  REQUIRE(diag.rows.size() == 3);  // one per interval
  CHECK(diag.rows[0].at_risk == 3);
  CHECK(diag.rows[1].at_risk == 3);
  CHECK(diag.rows[2].at_risk == 0);
  CHECK(diag.rows[1].artificial == 2);  // clones 2a and 3a censored at t = 2
  CHECK(diag.low_support);              // the emptied third interval trips any positive floor
  CHECK_FALSE(support_diagnostics(clones, grid, 0).low_support);
}

TEST_CASE("person-period expansion of the toy stop-early arm") {
  const VisitGrid grid = toy_grid();
  const auto subjects = toy_subjects();
  const auto clones =
      clone_arm(subjects, toy_stop_early(), DeviationConvention::end_of_interval, grid);
  const CovariateSpec spec{{"X1", "X2", "X3k", "X4k"}};
  const auto rows = expand_visits(clones, subjects, grid, spec);
  REQUIRE(rows.size() == 6);

  // worked long-format example: subject 2's clone, second interval
  const auto& r = rows[3];
  CHECK(r.subject_index == 1);
  CHECK(r.j == 2);
  CHECK(r.t_start == 1.0);
  CHECK(r.t_stop == 2.0);
  CHECK(r.covs[0] == 1.0);  // X1
  CHECK(r.covs[1] == 0.0);  // X2
  CHECK(r.covs[2] == 1.4);  // X3 at the interval-start visit
  CHECK(r.covs[3] == 1.0);  // X4 at the interval-start visit
  CHECK(r.art_censor == 1);
  CHECK(r.y == 0);

  // subject 1's clone ends with its event in interval 2
  CHECK(rows[1].j == 2);
  CHECK(rows[1].t_stop == 1.5);
  CHECK(rows[1].y == 1);
  CHECK(rows[1].art_censor == 0);
  // indicators sit on terminal rows only
  CHECK(rows[0].y == 0);
  CHECK(rows[0].art_censor == 0);
}

TEST_CASE("covariate carry-back fills unattended visits") {
  const VisitGrid grid = toy_grid();
  const auto subjects = toy_subjects();
  // subject 1 misses visit 2; interval 3 snapshot falls back to visit 1
  CHECK(covariate_value(subjects[0], "X3k", 3) == 1.8);
  CHECK(covariate_value(subjects[0], "X4k", 3) == 1.0);
  CHECK(covariate_value(subjects[0], "X3k0", 3) == 2.0);
  CHECK(covariate_value(subjects[0], "X4k0", 1) == 0.0);
  CHECK_THROWS_AS(covariate_value(subjects[0], "bogus", 1), std::invalid_argument);
}

TEST_CASE("expansion rejects non-positive follow-up") {
  const VisitGrid grid = toy_grid();
  auto subjects = toy_subjects();
  subjects[0].A[0] = 0.0;  // deviates at visit 0 under every treat-first strategy
  const auto clones = clone_arm(subjects, toy_stop_early(), DeviationConvention::at_visit, grid);
  CHECK(clones[0].T_tilde_d == 0.0);
  CHECK_THROWS_AS(expand_visits(clones, subjects, grid, CovariateSpec{{"X1"}}),
                  std::invalid_argument);
}

TEST_CASE("panel round-trip reconstructs clone terminal state") {
  const VisitGrid grid({0, 1, 2, 3, 4}, 10.0);
  Rng rng = Rng::for_unit(53, 12, 0);
  std::vector<SubjectRecord> subjects;
  for (int i = 0; i < 300; ++i) {
    SubjectRecord s;
    s.id = i;
    s.X1 = rng.normal(0, 1);
    s.X2 = rng.normal(0, 1);
    s.X3 = rng.normal(0, 1);
    for (int k = 0; k <= 4; ++k) s.A.push_back(rng.uniform() < 0.6 ? 1.0 : 0.0);
    s.A[0] = 1.0;
    s.T_tilde = 0.05 + 9.95 * rng.uniform();
    s.event = rng.uniform() < 0.5 ? 1 : 0;
    subjects.push_back(s);
  }
  const auto clones = clone_arm(subjects, Strategy(3, 4), DeviationConvention::at_visit, grid);
  const auto rows = expand_visits(clones, subjects, grid, CovariateSpec{{"X1", "X2", "X3"}});
  for (std::size_t c = 0; c < clones.size(); ++c) {
    double t_max = 0.0;
    int y = 0, art = 0, nat = 0;
    double prev_stop = 0.0;
    for (const auto& r : rows) {
      if (static_cast<std::size_t>(r.clone_index) != c) continue;
      CHECK(r.t_start == prev_stop);  // contiguous fragments starting at 0
      CHECK(r.t_stop > r.t_start);
      CHECK(r.j == grid.interval_of(r.t_stop));
      prev_stop = r.t_stop;
      t_max = r.t_stop;
      y += r.y;
      art += r.art_censor;
      nat += r.k_nat;
    }
    CHECK(t_max == Catch::Approx(clones[c].T_tilde_d));
    CHECK(y == clones[c].delta_d);
    CHECK(art == (clones[c].artificially_censored ? 1 : 0));
    CHECK(nat == (clones[c].naturally_censored ? 1 : 0));
  }
}

TEST_CASE("refinement splits intervals without changing indices or totals") {
  const VisitGrid grid = toy_grid();
  const auto subjects = toy_subjects();
  const auto clones =
      clone_arm(subjects, toy_stop_early(), DeviationConvention::end_of_interval, grid);
  const auto rows = expand_visits(clones, subjects, grid, CovariateSpec{{"X1"}});

  // boundary cuts are no-ops
  const auto same = refine_at_times(rows, {0.0, 1.0, 2.0, 3.0});
  REQUIRE(same.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(same[i].t_start == rows[i].t_start);
    CHECK(same[i].t_stop == rows[i].t_stop);
    CHECK(same[i].j == rows[i].j);
  }

  // interior cut splits covering fragments, keeps j, moves indicators to the tail
  const auto cut = refine_at_times(rows, {1.25});
  int y_total = 0, art_total = 0;
  double exposure_rows = 0, exposure_cut = 0;
  for (const auto& r : rows) exposure_rows += r.t_stop - r.t_start;
  for (const auto& r : cut) {
    CHECK(r.j == grid.interval_of(r.t_stop));
    exposure_cut += r.t_stop - r.t_start;
    y_total += r.y;
    art_total += r.art_censor;
    if (r.y == 1 || r.art_censor == 1) {
      // indicator rows are terminal fragments of their clone
      CHECK(r.t_stop ==
            std::min(clones[static_cast<std::size_t>(r.clone_index)].T_tilde_d, grid.tau));
    }
  }
  CHECK(exposure_cut == Catch::Approx(exposure_rows));
  CHECK(y_total == 1);
  CHECK(art_total == 2);
  CHECK(cut.size() == rows.size() + 3);  // 1.25 interior to one fragment per clone
}

TEST_CASE("long-format CSV export has one line per fragment") {
  const VisitGrid grid = toy_grid();
  const auto subjects = toy_subjects();
  const auto clones =
      clone_arm(subjects, toy_stop_early(), DeviationConvention::end_of_interval, grid);
  const auto rows = expand_visits(clones, subjects, grid, CovariateSpec{{"X1", "X3k"}});
  const std::string path = "toy_long_format.csv";
  write_long_csv(rows, {"X1", "X3k"}, path);
  std::ifstream is(path);
  REQUIRE(is.good());
  std::string line;
  std::size_t n_lines = 0;
  while (std::getline(is, line)) ++n_lines;
  CHECK(n_lines == rows.size() + 1);
  std::remove(path.c_str());
}
