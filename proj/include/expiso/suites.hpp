#pragma once

#include <functional>
#include <string>
#include <vector>

#include "expiso/explorer.hpp"

// Canonical, fully deterministic check families behind the `verify`
// subcommand.  Each suite mixes the pinned sets every run must cover
// (extremal candidates, the sets the inequalities are tight on) with a
// seeded batch of random ball unions.

namespace expiso {

struct SuiteConfig {
  int n = 2;
  GridSpec grid = default_grid(2);
  std::uint64_t seed = 1;
  int trials = 8;
  std::vector<double> h_ladder;

  std::vector<double> ladder() const {
    if (!h_ladder.empty()) return h_ladder;
    return {2.0 * grid.delta, 4.0 * grid.delta, 8.0 * grid.delta};
  }

  ScanConfig scan_config() const {
    ScanConfig cfg;
    cfg.n = n;
    cfg.grid = grid;
    cfg.seed = seed;
    cfg.trials = trials;
    cfg.h_ladder = h_ladder;
    return cfg;
  }
};

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{
      "trapezoid", "component", "poisson", "neighborhood",
      "symmetrisation", "reduction", "isoperimetry"};
  return names;
}

namespace detail {

inline void tag(VerificationReport& rep, const std::string& label) {
  rep.parameters["input"] = label;
}

inline GridSet suite_ball_union(const SuiteConfig& cfg, int trial) {
  return random_ball_union(cfg.scan_config(), trial);
}

}  // namespace detail

inline std::vector<VerificationReport> run_suite(const std::string& name, const SuiteConfig& cfg) {
  std::vector<VerificationReport> reports;
  const auto ladder = cfg.ladder();
  AnalyticProfile prof(cfg.n == 3 ? 3 : 2);

  if (name == "trapezoid") {
    const auto a_grid = [&] {
      auto g = log_spaced_radii(79, 1e-3, cfg.grid.x_max, false);
      g.insert(g.begin(), 0.0);
      return g;
    }();
    const auto b_grid = log_spaced_radii(80, 1e-3, cfg.grid.x_max, true);
    reports.push_back(verify_trapezoid_lemma(cfg.n, a_grid, b_grid));
  } else if (name == "component") {
    reports.push_back(verify_component_lemma(cfg.n, make_component_samples(1000, cfg.seed)));
  } else if (name == "poisson") {
    reports.push_back(verify_poisson_median(200));
  } else if (name == "neighborhood") {
    const double h = 4.0 * cfg.grid.delta;
    {
      auto rep = verify_neighborhood_form(
          realize_on_grid(extremal_for_measure(cfg.n, 0.7), cfg.grid), h);
      detail::tag(rep, "simplex_p0.7");
      reports.push_back(rep);
    }
    for (int t = 0; t < cfg.trials; ++t) {
      const GridSet b = detail::suite_ball_union(cfg, t);
      try {
        auto rep = verify_neighborhood_form(b, h);
        detail::tag(rep, "ball_union_" + std::to_string(t));
        reports.push_back(rep);
      } catch (const std::invalid_argument&) {
        // measure straddles 1/2 across the dilation: neither form applies
      }
    }
  } else if (name == "symmetrisation") {
    if (cfg.n != 2) throw std::invalid_argument("symmetrisation suite: n = 2 only");
    {
      auto rep = verify_symmetrisation(make_grid_simplex(cfg.grid, prof.phi_inv(0.5)), ladder);
      detail::tag(rep, "median_simplex");
      reports.push_back(rep);
    }
    for (int t = 0; t < cfg.trials; ++t) {
      auto rep = verify_symmetrisation(detail::suite_ball_union(cfg, t), ladder);
      detail::tag(rep, "ball_union_" + std::to_string(t));
      reports.push_back(rep);
    }
  } else if (name == "reduction") {
    if (cfg.n != 2) throw std::invalid_argument("reduction suite: n = 2 only");
    {
      auto [wit, rep] = verify_reduction(make_grid_simplex(cfg.grid, prof.phi_inv(0.6)));
      detail::tag(rep, "simplex_p0.6");
      reports.push_back(rep);
    }
    {
      const GridSet trap = GridSet::from_predicate(
          cfg.grid,
          [](const Point& p) { return p[0] + p[1] > 1.0 && p[0] + p[1] < 2.5; }, false);
      auto [wit, rep] = verify_reduction(trap);
      detail::tag(rep, "trapezoid_1_2.5");
      reports.push_back(rep);
    }
    {
      auto [wit, rep] = verify_reduction(
          GridSet::from_ball_union(cfg.grid, {Point{2.0, 2.0, 0.0}}, {0.75}));
      detail::tag(rep, "off_axis_ball");
      reports.push_back(rep);
    }
    for (int t = 0; t < cfg.trials; ++t) {
      const GridSet u = detail::suite_ball_union(cfg, t);
      auto comps = u.connected_components();
      if (comps.empty()) continue;
      auto [wit, rep] = verify_reduction(comps.front());
      detail::tag(rep, "largest_component_" + std::to_string(t));
      reports.push_back(rep);
    }
  } else if (name == "isoperimetry") {
    {
      auto rep = verify_isoperimetry(
          realize_on_grid(extremal_for_measure(cfg.n, 0.5), cfg.grid), ladder);
      detail::tag(rep, "median_simplex");
      reports.push_back(rep);
    }
    for (int t = 0; t < cfg.trials; ++t) {
      try {
        auto rep = verify_isoperimetry(detail::suite_ball_union(cfg, t), ladder);
        detail::tag(rep, "ball_union_" + std::to_string(t));
        reports.push_back(rep);
      } catch (const std::invalid_argument&) {
        // degenerate draw: below the measure resolution of this grid
      }
    }
  } else if (name == "all") {
    for (const auto& suite : suite_names()) {
      if (cfg.n != 2 && (suite == "symmetrisation" || suite == "reduction")) continue;
      auto sub = run_suite(suite, cfg);
      reports.insert(reports.end(), sub.begin(), sub.end());
    }
  } else {
    throw std::invalid_argument("unknown suite: " + name);
  }
  return reports;
}

}  // namespace expiso
