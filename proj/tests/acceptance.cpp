// Acceptance suite: one line per criterion, nonzero exit if any fails.
// Budgets are enforced where stated; configurations are pinned so the run
// is reproducible bit for bit.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "expiso/explorer.hpp"
#include "expiso/suites.hpp"
#include "support/oracles.hpp"

using expiso::AnalyticProfile;
using expiso::GridSet;
using expiso::GridSpec;
using expiso::Point;
using expiso::ScanConfig;
using expiso::Verdict;

namespace {

int failures = 0;

void run_criterion(int id, const std::string& name, double budget_seconds,
                   const std::function<bool(std::string&)>& body) {
  std::string detail;
  bool ok = false;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    ok = body(detail);
  } catch (const std::exception& e) {
    ok = false;
    detail = std::string("exception: ") + e.what();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  bool in_budget = true;
  if (budget_seconds > 0.0 && secs > budget_seconds) {
    in_budget = false;
    detail += " [over budget " + std::to_string(budget_seconds) + " s]";
  }
  const bool pass = ok && in_budget;
  if (!pass) ++failures;
  std::printf("%s criterion %2d: %s (%.1f s)%s%s\n", pass ? "PASS" : "FAIL", id, name.c_str(), secs,
              detail.empty() ? "" : " - ", detail.c_str());
  std::fflush(stdout);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

int main() {
  // 1 -----------------------------------------------------------------
  run_criterion(1, "analytic core exactness (n=1..10, t in [0,50])", 5.0, [](std::string& detail) {
    double worst_sum = 0.0;
    double worst_round = 0.0;
    constexpr double kEps = 2.3e-16;
    for (int n = 1; n <= 10; ++n) {
      AnalyticProfile p(n);
      for (double t = 0.0; t <= 50.0; t += 0.05) {
        worst_sum = std::max(worst_sum, std::abs(p.phi(t) + p.psi(t) - 1.0));
        if (worst_sum > 1e-13) {
          detail = "phi+psi defect at n=" + std::to_string(n) + " t=" + fmt(t);
          return false;
        }
        if (t == 0.0) continue;
        bool covered = false;
        const double deriv = p.ball_boundary(t);
        if (kEps * p.phi(t) <= 2.5e-11 * deriv) {
          worst_round = std::max(worst_round, std::abs(p.phi_inv(p.phi(t)) - t));
          covered = true;
        }
        const double ps = p.psi(t);
        if (ps > 0.0 && kEps * ps <= 2.5e-11 * deriv) {
          worst_round = std::max(worst_round, std::abs(p.psi_inv(ps) - t));
          covered = true;
        }
        if (!covered) {
          detail = "no invertible side at n=" + std::to_string(n) + " t=" + fmt(t);
          return false;
        }
        if (worst_round > 1e-10) {
          detail = "round trip defect " + fmt(worst_round) + " at n=" + std::to_string(n) +
                   " t=" + fmt(t);
          return false;
        }
      }
    }
    detail = "max |phi+psi-1| = " + fmt(worst_sum) + ", max round trip = " + fmt(worst_round);
    return true;
  });

  // 2 -----------------------------------------------------------------
  run_criterion(2, "median radius and profile value at p = 1/2", 0.0, [](std::string& detail) {
    const double t_oracle = oracle::bisect(
        [](double t) { return oracle::phi2_closed(t) - 0.5; }, 0.0, 10.0);
    const double b_oracle = t_oracle * std::exp(-t_oracle);
    AnalyticProfile p2(2);
    const double t_lib = p2.phi_inv(0.5);
    const double b_lib = expiso::isoperimetric_profile(2, 0.5);
    detail = "median radius = " + fmt(t_lib) + " (oracle " + fmt(t_oracle) +
             "), boundary = " + fmt(b_lib) + " (oracle " + fmt(b_oracle) + ")";
    if (std::abs(t_oracle - 1.678347) > 1e-6) {
      detail += "; oracle radius drifted from 1.678347";
      return false;
    }
    return std::abs(t_lib - t_oracle) <= 1e-6 && std::abs(b_lib - b_oracle) <= 1e-6;
  });

  // 3 -----------------------------------------------------------------
  run_criterion(3, "trapezoid lemma sweep (n=2..6, 200x200 log grid)", 30.0, [](std::string& detail) {
    auto a_grid = expiso::log_spaced_radii(199, 1e-3, 30.0, false);
    a_grid.insert(a_grid.begin(), 0.0);
    const auto b_grid = expiso::log_spaced_radii(200, 1e-3, 30.0, true);
    double min_margin = expiso::kInf;
    for (int n = 2; n <= 6; ++n) {
      const auto rep = expiso::verify_trapezoid_lemma(n, a_grid, b_grid);
      min_margin = std::min(min_margin, rep.margin);
      if (rep.verdict != Verdict::pass) {
        detail = "sweep failed at n=" + std::to_string(n) + " margin=" + fmt(rep.margin);
        return false;
      }
    }
    const auto spot = expiso::verify_trapezoid_lemma(2, {1.0}, {2.0});
    detail = "min margin = " + fmt(min_margin) + ", spot(1,2) margin = " + fmt(spot.margin);
    return min_margin >= -1e-9 && std::abs(spot.margin - 0.4086) <= 1e-3;
  });

  // 4 -----------------------------------------------------------------
  run_criterion(4, "component lemma sweep (10000 per case, n=2..6)", 30.0, [](std::string& detail) {
    double min_margin = expiso::kInf;
    for (int n = 2; n <= 6; ++n) {
      const auto rep = expiso::verify_component_lemma(n, expiso::make_component_samples(10000, 91u));
      min_margin = std::min(min_margin, rep.margin);
      if (rep.margin < -1e-9) {
        detail = "margin " + fmt(rep.margin) + " at n=" + std::to_string(n);
        return false;
      }
    }
    detail = "min margin = " + fmt(min_margin);
    return true;
  });

  // 5 -----------------------------------------------------------------
  run_criterion(5, "poisson median and Cho interval (k = 1..200)", 1.0, [](std::string& detail) {
    const auto rep = expiso::verify_poisson_median(200);
    detail = "min margin = " + fmt(rep.margin);
    return rep.verdict == Verdict::pass && rep.margin >= 0.0;
  });

  // 6 -----------------------------------------------------------------
  run_criterion(6, "symmetrisation contract (100 trials, delta = 1/512)", 600.0,
                [](std::string& detail) {
    ScanConfig gen;
    gen.n = 2;
    gen.grid = expiso::default_grid(2);
    gen.seed = 61;
    gen.trials = 100;
    const auto ladder = gen.ladder();
    int good = 0;
    double worst_eq = expiso::kInf, worst_growth = expiso::kInf;
    for (int t = 0; t < gen.trials; ++t) {
      const auto rep = expiso::verify_symmetrisation(expiso::random_ball_union(gen, t), ladder);
      const double eq = rep.parameters["measure_margin"].get<double>();
      const double growth = rep.parameters["growth_margin"].get<double>();
      worst_eq = std::min(worst_eq, eq);
      worst_growth = std::min(worst_growth, growth);
      if (rep.verdict == Verdict::pass) ++good;
    }
    detail = std::to_string(good) + "/100 trials, worst measure slack = " + fmt(worst_eq) +
             ", worst growth margin = " + fmt(worst_growth);
    return good == 100;
  });

  // 7 -----------------------------------------------------------------
  run_criterion(7, "planar isoperimetry regression (100 trials)", 1200.0, [](std::string& detail) {
    ScanConfig cfg;
    cfg.n = 2;
    cfg.grid = expiso::default_grid(2);
    cfg.seed = 71;
    cfg.trials = 100;
    const auto res = expiso::conjecture_scan(cfg);
    int refined = 0;
    bool consistent = true;
    for (const auto& t : res.trials) {
      refined += t.refinements > 0;
      consistent = consistent && t.refinement_consistent;
    }
    detail = std::to_string(res.pass) + " pass / " + std::to_string(res.inconclusive) +
             " inconclusive / " + std::to_string(res.fail) + " fail; " + std::to_string(refined) +
             " refined; min margin = " + fmt(res.min_margin);
    return res.fail == 0 && consistent;
  });

  // 8 -----------------------------------------------------------------
  run_criterion(8, "counterexample reproduction (halfplane vs ball)", 1.0, [](std::string& detail) {
    const auto rep = expiso::counterexample_check();
    const double bh = rep.parameters["boundary_H"].get<double>();
    const double bb = rep.parameters["boundary_ball"].get<double>();
    const double r = rep.parameters["ball_radius"].get<double>();
    detail = "boundary(H) = " + fmt(bh) + ", ball radius = " + fmt(r) + ", boundary(ball) = " +
             fmt(bb) + ", margin = " + fmt(rep.margin);
    return std::abs(bh - std::exp(-3.0)) < 1e-12 && std::abs(bh - 0.0497871) < 1e-6 &&
           std::abs(r - 4.477) < 1e-2 && std::abs(bb - 0.0509) < 1e-4 && rep.margin > 1e-3;
  });

  // 9 -----------------------------------------------------------------
  run_criterion(9, "ball dilation exactness (20 radius/height pairs)", 0.0, [](std::string& detail) {
    const GridSpec spec = expiso::default_grid(2);
    AnalyticProfile p2(2);
    int exact = 0, exact_t = 0, tracked = 0;
    for (double t : {0.5, 1.0, 1.5, 2.2, 3.0}) {
      for (int k : {2, 4, 8, 16}) {
        const double h = k * spec.delta;
        const GridSet ball = expiso::make_grid_simplex(spec, t);
        const GridSet want = expiso::make_grid_simplex(spec, t + h);
        const GridSet grown = ball.dilate_l1(h);
        if (grown.same_cells(want)) ++exact;
        if (ball.dilate_T(h).same_cells(want)) ++exact_t;  // cone growth agrees on balls
        const auto m = grown.measure();
        if (std::abs(m.value - p2.phi(t + h)) <= m.error_bound) ++tracked;
      }
    }
    detail = std::to_string(exact) + "/20 cell-exact (l1), " + std::to_string(exact_t) +
             "/20 (T), " + std::to_string(tracked) + "/20 measures within error of phi(t+h)";
    return exact == 20 && exact_t == 20 && tracked == 20;
  });

  // 10 ----------------------------------------------------------------
  run_criterion(10, "spatial smoke scan (n=3, 20 trials plus extremal candidate)", 600.0,
                [](std::string& detail) {
    ScanConfig cfg;
    cfg.n = 3;
    cfg.grid = expiso::default_grid(3);
    cfg.seed = 20250809;
    cfg.trials = 20;
    cfg.balls_per_set = {2, 4};
    cfg.radius_range = {0.8, 2.2};
    const auto res = expiso::conjecture_scan(cfg);
    const bool complete = res.pass + res.fail + res.inconclusive == 20;

    AnalyticProfile p3(3);
    const GridSet candidate = expiso::make_grid_simplex(cfg.grid, p3.phi_inv(0.5));
    const auto rep = expiso::verify_isoperimetry(candidate, cfg.ladder());
    const double hmax = 8.0 * cfg.grid.delta;
    const bool candidate_saturates =
        std::abs(rep.margin) <= rep.tolerance + expiso::kLemmaL * hmax * hmax &&
        rep.verdict != Verdict::fail;

    detail = std::to_string(res.pass) + " pass / " + std::to_string(res.inconclusive) +
             " inconclusive / " + std::to_string(res.fail) + " fail (recorded); candidate margin = " +
             fmt(rep.margin) + " band = " + fmt(rep.tolerance);
    return complete && res.pass >= 1 && candidate_saturates;
  });

  std::printf("%s: %d/10 criteria passed\n", failures == 0 ? "ALL PASS" : "FAILURES",
              10 - failures);
  return failures == 0 ? 0 : 1;
}
