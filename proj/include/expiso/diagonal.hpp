#pragma once

#include <cmath>
#include <cstdint>
#include <ostream>
#include <vector>

#include "expiso/grid.hpp"
#include "expiso/report.hpp"

// Section-length profile along the anti-diagonals S_t = {x + y = t} and the
// symmetrisation that pushes every section into an interval anchored at the
// x axis, preserving its length.
//
// On the grid, the anti-diagonal through the centers of the cells with
// i + j = d is S_t at t = (d+1)*delta, and it crosses each such cell in a
// chord of length sqrt(2)*delta.  So f is sampled per cell diagonal:
// f((d+1)*delta) = sqrt(2)*delta*count_d, and the profile arithmetic (and
// the symmetrisation built from it) is exact counting.

namespace expiso {

inline constexpr double kSqrt2 = 1.4142135623730951;

struct DiagonalProfile {
  double delta_t = 0.0;               // sample step, equal to the grid delta
  std::vector<std::int32_t> counts;   // occupied cells per diagonal d = i + j

  int size() const { return static_cast<int>(counts.size()); }
  double t(int d) const { return (d + 1) * delta_t; }
  double length(int d) const { return kSqrt2 * delta_t * counts[static_cast<std::size_t>(d)]; }

  /// Smallest diagonal with a nonempty section, -1 for the empty profile.
  int support_min() const {
    for (int d = 0; d < size(); ++d) {
      if (counts[static_cast<std::size_t>(d)] > 0) return d;
    }
    return -1;
  }
  int support_max() const {
    for (int d = size() - 1; d >= 0; --d) {
      if (counts[static_cast<std::size_t>(d)] > 0) return d;
    }
    return -1;
  }
};

namespace detail {

inline void require_planar(const GridSet& a, const char* who) {
  if (a.spec().n != 2) throw std::invalid_argument(std::string(who) + ": n = 2 only");
}

}  // namespace detail

inline DiagonalProfile profile_of(const GridSet& a) {
  detail::require_planar(a, "profile_of");
  const int nx = a.cells_per_axis();
  DiagonalProfile p;
  p.delta_t = a.spec().delta;
  std::vector<std::int32_t> diff(static_cast<std::size_t>(2 * nx), 0);
  std::vector<detail::Run> runs;
  for (int j = 0; j < nx; ++j) {
    detail::extract_runs(a.row(j), a.words_per_row(), nx, runs);
    for (const auto& r : runs) {
      diff[static_cast<std::size_t>(j + r.begin)] += 1;
      diff[static_cast<std::size_t>(j + r.end)] -= 1;
    }
  }
  p.counts.assign(static_cast<std::size_t>(2 * nx - 1), 0);
  std::int32_t acc = 0;
  for (int d = 0; d < 2 * nx - 1; ++d) {
    acc += diff[static_cast<std::size_t>(d)];
    p.counts[static_cast<std::size_t>(d)] = acc;
  }
  return p;
}

/// Trapezoidal quadrature of (1/sqrt(2)) f(t) e^{-t} over the sampled
/// profile (with the exact zero sample at t = 0 prepended); the error budget
/// is the step-times-total-variation bound.
inline MeasureEstimate measure_from_profile(const DiagonalProfile& p) {
  const double dt = p.delta_t;
  MeasureEstimate est;
  double prev_g = 0.0;  // g(0) = 0 since f(t) <= sqrt(2) t
  double tv = 0.0;
  for (int d = 0; d < p.size(); ++d) {
    const double g = p.length(d) / kSqrt2 * std::exp(-p.t(d));
    est.value += 0.5 * dt * (prev_g + g);
    tv += std::abs(g - prev_g);
    prev_g = g;
  }
  est.value += 0.5 * dt * prev_g;  // close the last band down to zero
  tv += prev_g;
  est.error_bound = 0.5 * dt * tv;
  return est;
}

/// The symmetrised set C_A: on each anti-diagonal the occupied cells are
/// re-anchored at the x-axis end, keeping their count.  Cell counts per
/// diagonal (hence the exact measure, whose per-cell mass depends only on
/// i + j) are preserved; idempotent by construction.  For diagonals that
/// leave the box (d >= N) the anchor starts at the lowest in-box cell.
inline GridSet symmetrize(const GridSet& a) {
  detail::require_planar(a, "symmetrize");
  const int nx = a.cells_per_axis();
  const DiagonalProfile p = profile_of(a);
  GridSet out(a.spec(), a.includes_tail());
  for (int j = 0; j < nx; ++j) {
    std::uint64_t* row = out.row(j);
    // occupied iff min(j, N-1-i) < count[i+j]
    for (int w = 0; w < a.words_per_row(); ++w) {
      std::uint64_t bits = 0;
      const int base = w << 6;
      const int top = std::min(64, nx - base);
      for (int b = 0; b < top; ++b) {
        const int i = base + b;
        const std::int32_t slack = std::min(j, nx - 1 - i);
        if (slack < p.counts[static_cast<std::size_t>(i + j)]) bits |= 1ull << b;
      }
      row[w] = bits;
    }
  }
  return out;
}

namespace detail {

/// Indices occupied on diagonal d of a planar grid set, ascending x index.
inline std::vector<int> diagonal_section(const GridSet& a, int d) {
  const int nx = a.cells_per_axis();
  std::vector<int> idx;
  const int ilo = std::max(0, d - (nx - 1));
  const int ihi = std::min(d, nx - 1);
  for (int i = ilo; i <= ihi; ++i) {
    if (a.cell(i, d - i)) idx.push_back(i);
  }
  return idx;
}

/// |union of [i + lo, i + hi] over sources|, clipped to the orthant part of
/// diagonal ds.
inline int dilated_section_count(const std::vector<int>& sources, int lo, int hi, int ds, int nx) {
  const int clip_lo = std::max(0, ds - (nx - 1));
  const int clip_hi = std::min(ds, nx - 1);
  int total = 0;
  int covered_to = clip_lo - 1;  // last counted index
  for (const int i : sources) {
    const int b = std::max(i + lo, covered_to + 1);
    const int e = std::min(i + hi, clip_hi);
    if (e >= b) {
      total += e - b + 1;
      covered_to = e;
    } else {
      covered_to = std::max(covered_to, std::min(i + hi, clip_hi));
    }
  }
  return total;
}

}  // namespace detail

/// Single-slice growth comparison: the section of A on S_t, pushed by hT and
/// read on S_s, is at least as long as the same construction applied to the
/// anchored rearrangement, up to two cells of slack.
inline VerificationReport slice_growth_check(const GridSet& a, double s, double t, double h) {
  detail::require_planar(a, "slice_growth_check");
  const double delta = a.spec().delta;
  const int nx = a.cells_per_axis();
  const auto as_steps = [&](double v, const char* name) {
    const long long k = std::llround(v / delta);
    if (k < 1 || std::abs(v - static_cast<double>(k) * delta) > 1e-9 * std::max(delta, v)) {
      throw std::invalid_argument(std::string("slice_growth_check: ") + name +
                                  " must be a positive multiple of delta");
    }
    return static_cast<int>(k);
  };
  const int ms = as_steps(s, "s");
  const int mt = as_steps(t, "t");
  const int k = as_steps(h, "h");
  if (std::abs(ms - mt) > k) {
    throw std::invalid_argument("slice_growth_check: requires |s - t| <= h");
  }
  const int dt = mt - 1;  // t = (d+1) delta
  const int ds = ms - 1;
  if (dt >= 2 * nx - 1 || ds >= 2 * nx - 1) {
    throw std::invalid_argument("slice_growth_check: diagonal outside the grid");
  }
  const int m = ds - dt;
  const int lo = std::min(m, 0), hi = std::max(m, 0);

  const std::vector<int> section_a = detail::diagonal_section(a, dt);
  const int c = static_cast<int>(section_a.size());
  // anchored section of C_A on dt: x indices descending from d - j_min
  std::vector<int> section_c;
  const int j_min = std::max(0, dt - (nx - 1));
  for (int q = 0; q < c; ++q) {
    const int i = dt - (j_min + c - 1 - q);
    if (i >= 0 && i <= std::min(dt, nx - 1)) section_c.push_back(i);
  }

  const int grown_a = detail::dilated_section_count(section_a, lo, hi, ds, nx);
  const int grown_c = detail::dilated_section_count(section_c, lo, hi, ds, nx);

  VerificationReport rep;
  rep.check_name = "slice_growth";
  rep.parameters = {{"s", s}, {"t", t}, {"h", h},
                    {"section_cells", c},
                    {"grown_cells_a", grown_a},
                    {"grown_cells_c", grown_c}};
  rep.margin = kSqrt2 * delta * (grown_a - grown_c);
  rep.tolerance = 2.0 * kSqrt2 * delta;
  rep.finalize_analytic();
  return rep;
}

inline void write_profile_csv(std::ostream& os, const DiagonalProfile& p) {
  os << "t,f\n";
  char buf[64];
  for (int d = 0; d < p.size(); ++d) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", p.t(d), p.length(d));
    os << buf;
  }
}

}  // namespace expiso
