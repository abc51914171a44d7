#pragma once

#include <stdexcept>
#include <vector>

#include "expiso/analytic.hpp"
#include "expiso/grid.hpp"

// The comparison set B_A: the simplex t B_1^n when the measure is at least
// 1/2 (ties resolve to the simplex), otherwise the complement of a simplex,
// with the radius matching the measure.

namespace expiso {

enum class ExtremalKind { simplex, complement };

inline const char* to_string(ExtremalKind k) {
  return k == ExtremalKind::simplex ? "simplex" : "complement";
}

struct ExtremalSpec {
  ExtremalKind kind;
  double radius;
  int n;
};

inline ExtremalSpec extremal_for_measure(int n, double p) {
  if (!(p > 0.0) || !(p < 1.0)) {
    throw std::invalid_argument("extremal_for_measure: p must lie in (0, 1)");
  }
  AnalyticProfile prof(n);
  if (p >= 0.5) return {ExtremalKind::simplex, prof.phi_inv(p), n};
  return {ExtremalKind::complement, prof.psi_inv(p), n};
}

/// Minimal boundary measure of the conjectured extremal family at measure p;
/// both kinds share the formula C_n e^{-t} t^{n-1} at their own radius.
inline double isoperimetric_profile(int n, double p) {
  return AnalyticProfile(n).ball_boundary(extremal_for_measure(n, p).radius);
}

/// Grid simplex {cells with center l1 norm <= t}; t = 0 gives the empty set.
inline GridSet make_grid_simplex(const GridSpec& spec, double t) {
  GridSet out(spec, false);
  const double d = spec.delta;
  const int nx = spec.cells;
  const double half = 0.5 * spec.n;
  const int nz = spec.n == 3 ? nx : 1;
  for (int k = 0; k < nz; ++k) {
    for (int j = 0; j < nx; ++j) {
      int hi = static_cast<int>(std::floor(t / d - j - k - half));
      while ((hi + 1 + j + k + half) * d <= t) ++hi;
      while (hi >= 0 && (hi + j + k + half) * d > t) --hi;
      if (hi >= 0) out.fill_x_run(0, hi + 1, j, k);
    }
  }
  return out;
}

inline GridSet realize_on_grid(const ExtremalSpec& es, const GridSpec& spec) {
  if (es.n != spec.n) throw std::invalid_argument("realize_on_grid: dimension mismatch");
  if (es.kind == ExtremalKind::simplex) return make_grid_simplex(spec, es.radius);
  if (es.radius > spec.n * spec.x_max) {
    throw std::invalid_argument("realize_on_grid: complement radius beyond the truncation box");
  }
  return make_grid_simplex(spec, es.radius).complement();
}

struct ProfileRow {
  double p;
  ExtremalKind kind;
  double radius;
  double boundary;
};

/// Rows (p, kind, radius, boundary) of the isoperimetric profile on a
/// caller-supplied p grid.
inline std::vector<ProfileRow> profile_curve(int n, const std::vector<double>& p_grid) {
  std::vector<ProfileRow> rows;
  rows.reserve(p_grid.size());
  AnalyticProfile prof(n);
  for (const double p : p_grid) {
    const ExtremalSpec es = extremal_for_measure(n, p);
    rows.push_back({p, es.kind, es.radius, prof.ball_boundary(es.radius)});
  }
  return rows;
}

}  // namespace expiso
