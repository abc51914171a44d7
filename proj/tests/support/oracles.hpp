#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>

// Independent oracles used by the test suites.  Everything here is kept
// deliberately naive (adaptive quadrature, bisection, brute force) so the
// library code paths under test share nothing with them.

namespace oracle {

inline double simpson(const std::function<double(double)>& f, double a, double b) {
  const double m = 0.5 * (a + b);
  return (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b));
}

inline double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double b,
                                   double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double left = simpson(f, a, m);
  const double right = simpson(f, m, b);
  const double delta = left + right - whole;
  if (depth <= 0) throw std::runtime_error("adaptive_simpson: depth exhausted");
  if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adaptive_simpson_rec(f, a, m, left, 0.5 * tol, depth - 1) +
         adaptive_simpson_rec(f, m, b, right, 0.5 * tol, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-13) {
  if (b <= a) return 0.0;
  return adaptive_simpson_rec(f, a, b, simpson(f, a, b), tol, 60);
}

/// Quadrature of the paper integral: (1/(n-1)!) * int_0^t e^{-x} x^{n-1} dx.
inline double phi_quadrature(int n, double t, double tol = 1e-13) {
  double fact = 1.0;
  for (int i = 2; i < n; ++i) fact *= static_cast<double>(i);
  const auto integrand = [n](double x) {
    return std::exp(-x) * std::pow(x, n - 1);
  };
  if (std::isinf(t)) t = static_cast<double>(n) + 80.0;
  return integrate(integrand, 0.0, t, tol) / fact;
}

inline double bisect(const std::function<double(double)>& f, double lo, double hi,
                     double tol = 1e-14) {
  double flo = f(lo);
  if (flo == 0.0) return lo;
  for (int i = 0; i < 300 && hi - lo > tol; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm <= 0.0) == (flo <= 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Closed forms for n = 2, used to cross-check the quadrature oracle itself.
inline double phi2_closed(double t) { return 1.0 - (1.0 + t) * std::exp(-t); }
inline double psi2_closed(double t) { return (1.0 + t) * std::exp(-t); }

}  // namespace oracle
