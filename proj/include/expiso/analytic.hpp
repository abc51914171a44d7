#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

// Closed-form radial quantities of the product exponential measure
// nu on the positive orthant with the l1 metric:
//
//   phi(t) = nu(t B_1^n)        = P(n, t)   (regularized lower incomplete gamma)
//   psi(t) = nu(R_+^n \ t B_1^n) = Q(n, t)
//   nu^+(t B_1^n) = nu^+((t B_1^n)^c) = C_n e^{-t} t^{n-1},  C_n = 1/(n-1)!
//
// plus boundary formulas for radial annuli ("trapezoids") and the Poisson
// CDF facts those formulas reduce to by integration by parts.

namespace expiso {

inline constexpr int kMaxDimension = 20;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

namespace detail {

inline constexpr double kGammaEps = 1e-16;
inline constexpr int kGammaMaxIter = 600;

// Lower regularized incomplete gamma by power series; valid for x < a + 1.
inline double gamma_p_series(double a, double x) {
  if (x <= 0.0) return 0.0;
  double ap = a;
  double del = 1.0 / a;
  double sum = del;
  for (int i = 0; i < kGammaMaxIter; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * kGammaEps) {
      return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
  }
  throw std::runtime_error("gamma_p_series: no convergence");
}

// Upper regularized incomplete gamma by modified Lentz continued fraction;
// valid for x >= a + 1.
inline double gamma_q_cf(double a, double x) {
  constexpr double fpmin = std::numeric_limits<double>::min() / kGammaEps;
  double b = x + 1.0 - a;
  double c = 1.0 / fpmin;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kGammaMaxIter; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < fpmin) d = fpmin;
    c = b + an / c;
    if (std::abs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kGammaEps) {
      return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
    }
  }
  throw std::runtime_error("gamma_q_cf: no convergence");
}

inline double gamma_p(double a, double x) {
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_cf(a, x);
}

inline double gamma_q(double a, double x) {
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_cf(a, x);
}

}  // namespace detail

/// 1/(n-1)! for 1 <= n <= kMaxDimension.
inline double normalizing_constant(int n) {
  if (n < 1 || n > kMaxDimension) {
    throw std::invalid_argument("normalizing_constant: dimension " + std::to_string(n) +
                                " outside supported range [1, " + std::to_string(kMaxDimension) + "]");
  }
  double fact = 1.0;
  for (int i = 2; i < n; ++i) fact *= static_cast<double>(i);
  return 1.0 / fact;
}

/// Radial annulus {x in R_+^n : a < |x|_1 < b}; b may be infinite.
struct TrapezoidSpec {
  double a;
  double b;
  TrapezoidSpec(double a_, double b_) : a(a_), b(b_) {
    if (!(a >= 0.0) || !(b > a)) {
      throw std::invalid_argument("TrapezoidSpec: requires 0 <= a < b <= inf");
    }
  }
};

class AnalyticProfile {
 public:
  explicit AnalyticProfile(int n) : n_(n), c_n_(normalizing_constant(n)) {}

  int dim() const { return n_; }
  double c_n() const { return c_n_; }

  /// nu(t B_1^n); nondecreasing from 0 to 1.
  double phi(double t) const {
    require_radius(t, "phi");
    if (std::isinf(t)) return 1.0;
    return detail::gamma_p(static_cast<double>(n_), t);
  }

  /// nu(R_+^n \ t B_1^n); evaluated from the upper tail, so no cancellation
  /// for large t.
  double psi(double t) const {
    require_radius(t, "psi");
    if (std::isinf(t)) return 0.0;
    return detail::gamma_q(static_cast<double>(n_), t);
  }

  /// Radius t with phi(t) = p, for p in [0, 1).
  double phi_inv(double p) const {
    if (!(p >= 0.0) || p >= 1.0) {
      throw std::invalid_argument("phi_inv: p must lie in [0, 1)");
    }
    if (p == 0.0) return 0.0;
    return invert([this](double t) { return phi(t); }, p, /*increasing=*/true);
  }

  /// Radius t with psi(t) = p, for p in (0, 1].
  double psi_inv(double p) const {
    if (!(p > 0.0) || p > 1.0) {
      throw std::invalid_argument("psi_inv: p must lie in (0, 1]");
    }
    if (p == 1.0) return 0.0;
    return invert([this](double t) { return psi(t); }, p, /*increasing=*/false);
  }

  /// nu^+(t B_1^n) = C_n e^{-t} t^{n-1}; also the boundary measure of the
  /// complement set.
  double ball_boundary(double t) const {
    require_radius(t, "ball_boundary");
    if (std::isinf(t)) return 0.0;
    if (t == 0.0) return n_ == 1 ? c_n_ : 0.0;
    return c_n_ * std::exp(static_cast<double>(n_ - 1) * std::log(t) - t);
  }

  /// phi(b) - phi(a) with phi(inf) = 1.
  double trapezoid_measure(const TrapezoidSpec& s) const {
    return phi(s.b) - phi(s.a);
  }

  /// Sum of the two face boundary measures; the inner face vanishes for
  /// a = 0 and the outer face for b = inf.
  double trapezoid_boundary(const TrapezoidSpec& s) const {
    double total = 0.0;
    if (s.a > 0.0) total += ball_boundary(s.a);
    if (!std::isinf(s.b)) total += ball_boundary(s.b);
    return total;
  }

 private:
  static void require_radius(double t, const char* who) {
    if (!(t >= 0.0)) {
      throw std::invalid_argument(std::string(who) + ": radius must be >= 0");
    }
  }

  // Bracketed bisection to width 1e-13 followed by a short Newton polish.
  template <typename F>
  double invert(F&& f, double p, bool increasing) const {
    double lo = 0.0;
    double hi = static_cast<double>(n_) + 45.0;
    const auto above = [&](double t) { return increasing ? f(t) >= p : f(t) <= p; };
    int guard = 0;
    while (!above(hi)) {
      hi *= 1.5;
      if (++guard > 200) throw std::runtime_error("invert: failed to bracket root");
    }
    for (int i = 0; i < 300 && hi - lo > 1e-13; ++i) {
      const double mid = 0.5 * (lo + hi);
      if (above(mid)) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    double t = 0.5 * (lo + hi);
    for (int i = 0; i < 3; ++i) {
      const double deriv = ball_boundary(t);
      if (!(deriv > 0.0)) break;
      const double resid = f(t) - p;
      const double step = (increasing ? resid : -resid) / deriv;
      const double next = t - step;
      if (!(next >= lo - 1.0) || !(next <= hi + 1.0)) break;
      t = std::max(next, 0.0);
    }
    return t;
  }

  int n_;
  double c_n_;
};

/// Pr(Poiss(lambda) <= k) by the stable term recurrence.  Rejected above
/// lambda = 700 where exp(-lambda) leaves the normal double range.
inline double poisson_cdf(int k, double lambda) {
  if (k < 0) throw std::invalid_argument("poisson_cdf: k must be >= 0");
  if (!(lambda > 0.0)) throw std::invalid_argument("poisson_cdf: lambda must be > 0");
  if (lambda > 700.0) throw std::invalid_argument("poisson_cdf: lambda > 700 rejected (overflow guard)");
  double term = std::exp(-lambda);
  double sum = term;
  for (int j = 1; j <= k; ++j) {
    term *= lambda / static_cast<double>(j);
    sum += term;
  }
  return std::min(sum, 1.0);
}

}  // namespace expiso
