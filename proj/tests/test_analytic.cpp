#include <catch_amalgamated.hpp>

#include <cmath>

#include "expiso/analytic.hpp"
#include "support/oracles.hpp"

using expiso::AnalyticProfile;
using expiso::TrapezoidSpec;
using Catch::Approx;

namespace {
constexpr double kE1 = 0.36787944117144233;  // e^-1
}

TEST_CASE("normalizing constant") {
  CHECK(expiso::normalizing_constant(1) == 1.0);
  CHECK(expiso::normalizing_constant(2) == 1.0);
  CHECK(expiso::normalizing_constant(5) == Approx(1.0 / 24.0).epsilon(0));
  CHECK_THROWS_AS(expiso::normalizing_constant(0), std::invalid_argument);
  CHECK_THROWS_AS(expiso::normalizing_constant(21), std::invalid_argument);
}

TEST_CASE("phi matches quadrature oracle and closed form") {
  AnalyticProfile p2(2);
  CHECK(p2.phi(0.0) == 0.0);
  CHECK(p2.phi(expiso::kInf) == 1.0);

  const double want = oracle::phi_quadrature(2, 1.0);
  CHECK(want == Approx(oracle::phi2_closed(1.0)).margin(1e-12));
  CHECK(p2.phi(1.0) == Approx(want).margin(1e-12));
  CHECK(p2.phi(1.0) == Approx(0.264241).margin(1e-6));

  for (int n : {1, 3, 5, 10}) {
    AnalyticProfile p(n);
    for (double t : {0.25, 1.0, 3.5, 9.0, 20.0}) {
      CAPTURE(n, t);
      CHECK(p.phi(t) == Approx(oracle::phi_quadrature(n, t)).margin(1e-11));
    }
  }
  CHECK_THROWS_AS(p2.phi(-0.1), std::invalid_argument);
}

TEST_CASE("psi complements phi") {
  AnalyticProfile p2(2);
  CHECK(p2.psi(0.0) == 1.0);
  CHECK(p2.psi(1.0) == Approx(2.0 * kE1).margin(1e-13));
  AnalyticProfile p3(3);
  CHECK(p3.psi(0.0) == 1.0);
  CHECK_THROWS_AS(p2.psi(-1e-9), std::invalid_argument);
}

TEST_CASE("phi + psi = 1 across dimensions") {
  for (int n = 1; n <= 10; ++n) {
    AnalyticProfile p(n);
    for (double t = 0.0; t <= 50.0; t += 0.37) {
      CAPTURE(n, t);
      CHECK(std::abs(p.phi(t) + p.psi(t) - 1.0) <= 1e-13);
    }
  }
}

TEST_CASE("inverses") {
  AnalyticProfile p2(2);
  CHECK(p2.phi_inv(0.0) == 0.0);
  CHECK(p2.psi_inv(1.0) == 0.0);

  // Oracle: bisection on the closed form 1-(1+t)e^-t = 1/2.
  const double median = oracle::bisect(
      [](double t) { return oracle::phi2_closed(t) - 0.5; }, 0.0, 10.0);
  CHECK(median == Approx(1.678347).margin(1e-6));
  CHECK(p2.phi_inv(0.5) == Approx(median).margin(1e-10));
  CHECK(p2.psi_inv(0.5) == Approx(median).margin(1e-10));

  CHECK(p2.phi_inv(0.264241) == Approx(1.0).margin(1e-5));
  CHECK(p2.psi_inv(0.735759) == Approx(1.0).margin(1e-5));

  CHECK_THROWS_AS(p2.phi_inv(1.0), std::invalid_argument);
  CHECK_THROWS_AS(p2.phi_inv(-0.5), std::invalid_argument);
  CHECK_THROWS_AS(p2.psi_inv(0.0), std::invalid_argument);
  CHECK_THROWS_AS(p2.psi_inv(1.5), std::invalid_argument);
}

TEST_CASE("inverse round trips") {
  // Each side is checked where the represented measure still resolves the
  // radius to the target accuracy: a double stores phi(t) with spacing
  // ~eps*phi(t), which the inverse turns into a radius error of
  // eps*phi(t)/phi'(t).  phi covers small radii, psi the far tail, and the
  // two regions overlap, so together they cover all of [0, 50].
  constexpr double kEps = 2.3e-16;
  constexpr double kTol = 1e-10;
  for (int n = 1; n <= 10; ++n) {
    AnalyticProfile p(n);
    for (double t = 0.05; t <= 50.0; t += 0.61) {
      CAPTURE(n, t);
      bool covered = false;
      const double deriv = p.ball_boundary(t);
      if (kEps * p.phi(t) <= 0.25 * kTol * deriv) {
        const double back = p.phi_inv(p.phi(t));
        CHECK(std::abs(back - t) <= kTol);
        covered = true;
      }
      const double ps = p.psi(t);
      if (ps > 0.0 && kEps * ps <= 0.25 * kTol * deriv) {
        const double back = p.psi_inv(ps);
        CHECK(std::abs(back - t) <= kTol);
        covered = true;
      }
      CHECK(covered);
    }
  }
}

TEST_CASE("ball boundary") {
  AnalyticProfile p2(2);
  CHECK(p2.ball_boundary(0.0) == 0.0);
  CHECK(p2.ball_boundary(1.0) == Approx(kE1).margin(1e-15));
  const double median = p2.phi_inv(0.5);
  CHECK(p2.ball_boundary(median) == Approx(median * std::exp(-median)).margin(1e-13));

  AnalyticProfile p1(1);
  CHECK(p1.ball_boundary(0.0) == 1.0);

  SECTION("matches forward difference of phi") {
    const double h = 1e-6;
    for (int n : {1, 2, 4, 7}) {
      AnalyticProfile p(n);
      for (double t : {0.3, 1.0, 2.5, 6.0, 12.0}) {
        CAPTURE(n, t);
        const double fd = (p.phi(t + h) - p.phi(t)) / h;
        CHECK(fd == Approx(p.ball_boundary(t)).margin(1e-6));
      }
    }
  }
}

TEST_CASE("trapezoid measure and boundary") {
  AnalyticProfile p2(2);
  CHECK(p2.trapezoid_measure({0.0, expiso::kInf}) == 1.0);
  CHECK(p2.trapezoid_measure({1.0, 2.0}) ==
        Approx(2.0 * kE1 - 3.0 * std::exp(-2.0)).margin(1e-13));
  CHECK(p2.trapezoid_measure({1.0, 2.0}) ==
        Approx(oracle::phi_quadrature(2, 2.0) - oracle::phi_quadrature(2, 1.0)).margin(1e-12));
  CHECK_THROWS_AS(TrapezoidSpec(1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(TrapezoidSpec(-0.5, 1.0), std::invalid_argument);

  CHECK(p2.trapezoid_boundary({0.0, 1.0}) == Approx(kE1).margin(1e-15));
  CHECK(p2.trapezoid_boundary({0.0, 1.0}) == Approx(p2.ball_boundary(1.0)).margin(0));
  CHECK(p2.trapezoid_boundary({1.0, 2.0}) ==
        Approx(kE1 + 2.0 * std::exp(-2.0)).margin(1e-13));
  CHECK(p2.trapezoid_boundary({1.0, expiso::kInf}) == Approx(kE1).margin(1e-15));

  SECTION("degenerate faces reproduce the ball boundary") {
    for (int n : {1, 2, 3, 6}) {
      AnalyticProfile p(n);
      for (double t : {0.5, 1.7, 4.0}) {
        CAPTURE(n, t);
        CHECK(p.trapezoid_boundary({0.0, t}) == Approx(p.ball_boundary(t)).margin(0));
        CHECK(p.trapezoid_boundary({t, expiso::kInf}) == Approx(p.ball_boundary(t)).margin(0));
      }
    }
  }
}

TEST_CASE("poisson cdf") {
  CHECK(expiso::poisson_cdf(0, 1.0) == Approx(kE1).margin(1e-15));
  CHECK(expiso::poisson_cdf(1, 1.0) == Approx(2.0 * kE1).margin(1e-15));
  CHECK(expiso::poisson_cdf(2, 2.0) == Approx(5.0 * std::exp(-2.0)).margin(1e-15));
  CHECK(expiso::poisson_cdf(2, 2.0) >= 0.5);
  CHECK_THROWS_AS(expiso::poisson_cdf(-1, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(expiso::poisson_cdf(3, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(expiso::poisson_cdf(3, 701.0), std::invalid_argument);
}

TEST_CASE("gamma-poisson duality") {
  // poisson_cdf(k, t) = Q(k+1, t): the integration-by-parts identity.
  for (int k : {0, 1, 2, 5, 12, 19}) {
    AnalyticProfile p(k + 1);
    for (double lam : {0.25, 1.0, 3.0, 10.0, 40.0}) {
      CAPTURE(k, lam);
      CHECK(std::abs(expiso::poisson_cdf(k, lam) - p.psi(lam)) <= 1e-12);
    }
  }
  // Beyond the profile's dimension cap the same identity holds against the
  // raw regularized upper gamma.
  for (int k : {40, 100, 200}) {
    for (double lam : {static_cast<double>(k), 0.5 * k, 1.5 * k}) {
      CAPTURE(k, lam);
      CHECK(std::abs(expiso::poisson_cdf(k, lam) -
                     expiso::detail::gamma_q(k + 1.0, lam)) <= 1e-12);
    }
  }
}

TEST_CASE("poisson median bounds") {
  const double log2 = std::log(2.0);
  for (int k = 1; k <= 200; ++k) {
    CAPTURE(k);
    CHECK(expiso::poisson_cdf(k, static_cast<double>(k)) >= 0.5);
    int l = 0;
    while (expiso::poisson_cdf(l, static_cast<double>(k)) < 0.5) ++l;
    CHECK(static_cast<double>(l) >= k - log2);
    CHECK(static_cast<double>(l) < k + 1.0 / 3.0);
  }
}

TEST_CASE("boundary function decreasing beyond n-1") {
  for (int n = 1; n <= 10; ++n) {
    AnalyticProfile p(n);
    double prev = p.ball_boundary(static_cast<double>(n - 1));
    for (double t = n - 1 + 0.1; t <= n + 30.0; t += 0.1) {
      const double cur = p.ball_boundary(t);
      CHECK(cur <= prev + 1e-15);
      prev = cur;
    }
  }
}
