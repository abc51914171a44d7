#include <catch_amalgamated.hpp>

#include "expiso/explorer.hpp"

using expiso::GridSpec;
using expiso::ScanConfig;
using expiso::Verdict;

namespace {

ScanConfig small_config_2d() {
  ScanConfig cfg;
  cfg.n = 2;
  cfg.grid = GridSpec(2, 1.0 / 64.0, 12.0);
  cfg.trials = 6;
  cfg.seed = 2024;
  cfg.balls_per_set = {1, 3};
  cfg.radius_range = {0.7, 1.8};
  return cfg;
}

}  // namespace

TEST_CASE("random ball unions are reproducible") {
  const ScanConfig cfg = small_config_2d();
  const auto d1 = expiso::random_ball_union_desc(cfg, 3);
  const auto d2 = expiso::random_ball_union_desc(cfg, 3);
  REQUIRE(d1.centers.size() == d2.centers.size());
  CHECK(d1.centers == d2.centers);
  CHECK(d1.radii == d2.radii);
  CHECK(expiso::random_ball_union(cfg, 3).same_cells(expiso::random_ball_union(cfg, 3)));

  ScanConfig other = cfg;
  other.seed = 2025;
  const auto d3 = expiso::random_ball_union_desc(other, 3);
  CHECK((d3.centers != d1.centers || d3.radii != d1.radii));
}

TEST_CASE("single huge ball covers the box") {
  ScanConfig cfg = small_config_2d();
  cfg.balls_per_set = {1, 1};
  cfg.radius_range = {30.0, 30.0};
  const auto a = expiso::random_ball_union(cfg, 0);
  CHECK(a.measure_value() > 0.99);
}

TEST_CASE("default draws land inside the box with sane measure") {
  const ScanConfig cfg = small_config_2d();
  for (int t = 0; t < 6; ++t) {
    const auto a = expiso::random_ball_union(cfg, t);
    const double m = a.measure_value();
    CAPTURE(t);
    CHECK(m > 0.0);
    CHECK(m < 1.0);
  }
}

TEST_CASE("planar scan is a regression suite") {
  const ScanConfig cfg = small_config_2d();
  const auto res = expiso::conjecture_scan(cfg);
  CHECK(res.pass + res.fail + res.inconclusive == cfg.trials);
  CHECK(res.fail == 0);
  CHECK(res.pass >= 1);
  for (const auto& t : res.trials) {
    CAPTURE(t.trial);
    CHECK(t.refinement_consistent);
  }

  SECTION("bit-identical reruns") {
    const auto res2 = expiso::conjecture_scan(cfg);
    CHECK(expiso::to_json(res, cfg).dump() == expiso::to_json(res2, cfg).dump());
  }
}

TEST_CASE("refinement halves the grid until the verdict resolves") {
  // An origin ball with its radius in the saturation zone is inconclusive on
  // a coarse grid (the staircase phase hides the sign), which is exactly
  // what triggers re-running at halved delta.
  ScanConfig cfg = small_config_2d();
  cfg.grid = GridSpec(2, 1.0 / 16.0, 12.0);  // deliberately coarse
  cfg.max_refinements = 2;
  cfg.explicit_trials = {{{expiso::Point{0.0, 0.0, 0.0}}, {1.6521}},
                         {{expiso::Point{1.5, 1.0, 0.0}, expiso::Point{4.0, 3.5, 0.0}}, {1.2, 1.0}}};
  const auto res = expiso::conjecture_scan(cfg);
  REQUIRE(res.trials.size() == 2);
  CHECK(res.fail == 0);
  const auto& near_extremal = res.trials[0];
  CHECK(near_extremal.refinements > 0);
  CHECK(static_cast<int>(near_extremal.margins_by_level.size()) == near_extremal.refinements + 1);
  CHECK(near_extremal.refinement_consistent);
  CHECK(near_extremal.verdict != Verdict::fail);
  CHECK(res.trials[1].verdict == Verdict::pass);
  CHECK(res.trials[1].refinements == 0);
}

TEST_CASE("memory budget caps refinement") {
  ScanConfig cfg = small_config_2d();
  cfg.grid = GridSpec(2, 1.0 / 16.0, 12.0);
  cfg.trials = 2;
  cfg.refine_set_bytes_budget = 1.0;  // nothing fits
  const auto res = expiso::conjecture_scan(cfg);
  for (const auto& t : res.trials) {
    CHECK(t.refinements == 0);
    if (t.verdict != Verdict::pass) CHECK(t.refinement_capped);
  }
}

TEST_CASE("three dimensional smoke scan") {
  ScanConfig cfg;
  cfg.n = 3;
  cfg.grid = GridSpec(3, 1.0 / 8.0, 10.0);
  cfg.trials = 3;
  cfg.seed = 99;
  cfg.radius_range = {0.8, 1.6};
  cfg.max_refinements = 1;
  const auto res = expiso::conjecture_scan(cfg);
  CHECK(res.pass + res.fail + res.inconclusive == 3);
  const auto j = expiso::to_json(res, cfg);
  CHECK(j["histogram"]["pass"].get<int>() == res.pass);
  CHECK(j["trials"].size() == 3);
}

TEST_CASE("config validation") {
  ScanConfig cfg = small_config_2d();
  cfg.trials = 0;
  CHECK_THROWS_AS(expiso::conjecture_scan(cfg), std::invalid_argument);
  cfg = small_config_2d();
  cfg.n = 3;  // grid still planar
  CHECK_THROWS_AS(expiso::conjecture_scan(cfg), std::invalid_argument);
  cfg = small_config_2d();
  cfg.h_ladder = {0.013};  // not a delta multiple
  CHECK_THROWS_AS(expiso::conjecture_scan(cfg), std::invalid_argument);
}
