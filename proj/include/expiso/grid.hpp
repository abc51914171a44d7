#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "expiso/analytic.hpp"

// Discretized Borel sets on a truncated orthant.  Occupancy is one bit per
// cell (cell = half-open box of edge delta, occupancy decided at the cell
// center), packed 64 cells per word along the x axis.  A set may declare
// that it contains everything beyond the truncation box (includes_tail),
// which is how complements of balls stay first-class.
//
// Dilation by h = k*delta is exact cell arithmetic: the l1 ball of grid
// radius k is the k-fold Minkowski sum of the one-step cross, and each
// directional cone of the T body composes the same way, so dilations are
// iterated one-step sweeps and are bit-reproducible.

namespace expiso {

struct GridSpec {
  int n;              // ambient dimension, 2 or 3
  double delta;       // cell edge, l1 units
  double x_max;       // truncation bound per axis
  int cells;          // cells per axis = x_max/delta
  double tail_bound;  // psi_n(x_max) >= nu(R_+^n \ box)

  GridSpec(int n_, double delta_, double x_max_) : n(n_), delta(delta_), x_max(x_max_) {
    if (n != 2 && n != 3) throw std::invalid_argument("GridSpec: n must be 2 or 3");
    if (!(delta > 0.0) || !(x_max > 0.0)) throw std::invalid_argument("GridSpec: delta and x_max must be > 0");
    const double ratio = x_max / delta;
    const long long c = std::llround(ratio);
    if (std::abs(ratio - static_cast<double>(c)) > 1e-9 * std::max(1.0, ratio) || c < 8) {
      throw std::invalid_argument("GridSpec: x_max/delta must be an integer >= 8");
    }
    cells = static_cast<int>(c);
    tail_bound = AnalyticProfile(n).psi(x_max);
  }

  bool operator==(const GridSpec& o) const {
    return n == o.n && delta == o.delta && x_max == o.x_max;
  }
};

/// Stock grids: n=2 -> 1/512 on [0,30]^2, n=3 -> 1/64 on [0,20]^3.
inline GridSpec default_grid(int n) {
  if (n == 2) return GridSpec(2, 1.0 / 512.0, 30.0);
  if (n == 3) return GridSpec(3, 1.0 / 64.0, 20.0);
  throw std::invalid_argument("default_grid: n must be 2 or 3");
}

struct MeasureEstimate {
  double value = 0.0;
  double error_bound = 0.0;
};

using Point = std::array<double, 3>;  // coordinates past spec.n are ignored

enum class DilationMetric { l1, T };

namespace detail {

inline int words_per_row(int nx) { return (nx + 63) / 64; }

inline std::uint64_t last_word_mask(int nx) {
  const int rem = nx & 63;
  return rem == 0 ? ~0ull : ((1ull << rem) - 1ull);
}

// dst |= src << 1 (toward larger x); caller masks the last word.
inline void row_or_shl1(std::uint64_t* dst, const std::uint64_t* src, int wpr) {
  std::uint64_t carry = 0;
  for (int w = 0; w < wpr; ++w) {
    const std::uint64_t s = src[w];
    dst[w] |= (s << 1) | carry;
    carry = s >> 63;
  }
}

// dst |= src >> 1 (toward smaller x); virtual_top = occupancy of the cell at
// index nx (the tail side).
inline void row_or_shr1(std::uint64_t* dst, const std::uint64_t* src, int wpr, int nx,
                        bool virtual_top) {
  for (int w = 0; w < wpr; ++w) {
    std::uint64_t v = src[w] >> 1;
    if (w + 1 < wpr) v |= src[w + 1] << 63;
    dst[w] |= v;
  }
  if (virtual_top) dst[(nx - 1) >> 6] |= 1ull << ((nx - 1) & 63);
}

// dst &= src << 1 with the cell at index -1 treated as occupied (the set
// never extends past the orthant wall, so the wall is not an interface).
inline void row_and_shl1(std::uint64_t* dst, const std::uint64_t* src, int wpr) {
  std::uint64_t carry = 1;
  for (int w = 0; w < wpr; ++w) {
    const std::uint64_t s = src[w];
    dst[w] &= (s << 1) | carry;
    carry = s >> 63;
  }
}

inline void row_and_shr1(std::uint64_t* dst, const std::uint64_t* src, int wpr, int nx,
                         bool virtual_top) {
  std::vector<std::uint64_t> tmp(static_cast<std::size_t>(wpr));
  for (int w = 0; w < wpr; ++w) {
    std::uint64_t v = src[w] >> 1;
    if (w + 1 < wpr) v |= src[w + 1] << 63;
    tmp[static_cast<std::size_t>(w)] = v;
  }
  if (virtual_top) tmp[static_cast<std::size_t>((nx - 1) >> 6)] |= 1ull << ((nx - 1) & 63);
  for (int w = 0; w < wpr; ++w) dst[w] &= tmp[static_cast<std::size_t>(w)];
}

inline void row_or(std::uint64_t* dst, const std::uint64_t* src, int wpr) {
  for (int w = 0; w < wpr; ++w) dst[w] |= src[w];
}

inline void row_and(std::uint64_t* dst, const std::uint64_t* src, int wpr) {
  for (int w = 0; w < wpr; ++w) dst[w] &= src[w];
}

// Exponential cell weights along one axis: w[i] = e^{-i d} - e^{-(i+1) d},
// the exact nu_1 mass of cell [i d, (i+1) d), plus per-word block sums.
struct AxisWeights {
  std::vector<double> w;
  std::vector<double> word_sum;

  AxisWeights(int nx, double delta) : w(static_cast<std::size_t>(nx)), word_sum(static_cast<std::size_t>(words_per_row(nx)), 0.0) {
    for (int i = 0; i < nx; ++i) {
      w[static_cast<std::size_t>(i)] = std::exp(-delta * i) - std::exp(-delta * (i + 1));
    }
    for (int i = 0; i < nx; ++i) word_sum[static_cast<std::size_t>(i >> 6)] += w[static_cast<std::size_t>(i)];
  }
};

inline double row_mass(const std::uint64_t* row, int wpr, std::uint64_t last_mask,
                       const AxisWeights& ax) {
  double m = 0.0;
  for (int w = 0; w < wpr; ++w) {
    std::uint64_t bits = row[w];
    if (bits == 0) continue;
    const std::uint64_t full = (w + 1 == wpr) ? last_mask : ~0ull;
    if (bits == full) {
      m += ax.word_sum[static_cast<std::size_t>(w)];
      continue;
    }
    const int base = w << 6;
    while (bits) {
      m += ax.w[static_cast<std::size_t>(base + std::countr_zero(bits))];
      bits &= bits - 1;
    }
  }
  return m;
}

}  // namespace detail

class GridSet {
 public:
  GridSet(const GridSpec& spec, bool includes_tail = false)
      : spec_(spec),
        includes_tail_(includes_tail),
        nx_(spec.cells),
        wpr_(detail::words_per_row(spec.cells)),
        nrows_(spec.n == 2 ? spec.cells : static_cast<std::int64_t>(spec.cells) * spec.cells),
        last_mask_(detail::last_word_mask(spec.cells)),
        bits_(static_cast<std::size_t>(nrows_) * static_cast<std::size_t>(wpr_), 0ull) {}

  /// Cell occupied iff its center lies within l1 distance radii[i] of
  /// centers[i] for some i.
  static GridSet from_ball_union(const GridSpec& spec, const std::vector<Point>& centers,
                                 const std::vector<double>& radii) {
    if (centers.empty() || centers.size() != radii.size()) {
      throw std::invalid_argument("from_ball_union: need equally many centers and radii, at least one");
    }
    for (const auto& c : centers) {
      for (int ax = 0; ax < spec.n; ++ax) {
        if (!(c[static_cast<std::size_t>(ax)] >= 0.0) || !(c[static_cast<std::size_t>(ax)] < spec.x_max)) {
          throw std::invalid_argument("from_ball_union: center outside the truncation box");
        }
      }
    }
    GridSet out(spec, false);
    for (std::size_t b = 0; b < centers.size(); ++b) {
      if (!(radii[b] > 0.0)) throw std::invalid_argument("from_ball_union: radii must be > 0");
      out.add_ball(centers[b], radii[b]);
    }
    return out;
  }

  static GridSet from_predicate(const GridSpec& spec, const std::function<bool(const Point&)>& pred,
                                bool includes_tail) {
    GridSet out(spec, includes_tail);
    const double d = spec.delta;
    const int nz = spec.n == 3 ? spec.cells : 1;
    for (int k = 0; k < nz; ++k) {
      for (int j = 0; j < spec.cells; ++j) {
        std::uint64_t* row = out.row(out.row_index(j, k));
        for (int i = 0; i < spec.cells; ++i) {
          const Point p{(i + 0.5) * d, (j + 0.5) * d, (k + 0.5) * d};
          if (pred(p)) row[i >> 6] |= 1ull << (i & 63);
        }
      }
    }
    if (includes_tail) out.require_tail_consistency("from_predicate");
    return out;
  }

  const GridSpec& spec() const { return spec_; }
  bool includes_tail() const { return includes_tail_; }
  int cells_per_axis() const { return nx_; }

  bool cell(int i, int j, int k = 0) const {
    return (row(row_index(j, k))[i >> 6] >> (i & 63)) & 1ull;
  }

  void set_cell(int i, int j, int k = 0) { row(row_index(j, k))[i >> 6] |= 1ull << (i & 63); }

  /// Occupies x indices [i0, i1) of one row.
  void fill_x_run(int i0, int i1, int j, int k = 0) {
    i0 = std::max(i0, 0);
    i1 = std::min(i1, nx_);
    if (i0 >= i1) return;
    std::uint64_t* r = row(row_index(j, k));
    const int w0 = i0 >> 6, w1 = (i1 - 1) >> 6;
    const std::uint64_t first = ~0ull << (i0 & 63);
    const std::uint64_t last = (~0ull) >> (63 - ((i1 - 1) & 63));
    if (w0 == w1) {
      r[w0] |= first & last;
    } else {
      r[w0] |= first;
      for (int w = w0 + 1; w < w1; ++w) r[w] = ~0ull;
      r[w1] |= last;
    }
    r[wpr_ - 1] &= last_mask_;
  }

  bool empty() const {
    for (const auto w : bits_) {
      if (w) return false;
    }
    return true;
  }

  std::uint64_t occupied_count() const {
    std::uint64_t c = 0;
    for (const auto w : bits_) c += static_cast<std::uint64_t>(std::popcount(w));
    return c;
  }

  bool same_cells(const GridSet& o) const {
    return spec_ == o.spec_ && includes_tail_ == o.includes_tail_ && bits_ == o.bits_;
  }

  bool subset_of(const GridSet& o) const {
    require_same_spec(o, "subset_of");
    for (std::size_t w = 0; w < bits_.size(); ++w) {
      if (bits_[w] & ~o.bits_[w]) return false;
    }
    return includes_tail_ <= o.includes_tail_;
  }

  /// Exact nu mass of the occupied cells (plus the exact tail mass when the
  /// set declares it).  No quadrature error: the per-cell mass is a product
  /// of exponential differences.
  double measure_value() const {
    const detail::AxisWeights ax(nx_, spec_.delta);
    double total = 0.0;
    if (spec_.n == 2) {
      for (int j = 0; j < nx_; ++j) {
        const double rm = detail::row_mass(row(j), wpr_, last_mask_, ax);
        if (rm != 0.0) total += ax.w[static_cast<std::size_t>(j)] * rm;
      }
    } else {
      for (int k = 0; k < nx_; ++k) {
        double plane = 0.0;
        for (int j = 0; j < nx_; ++j) {
          const double rm = detail::row_mass(row(row_index(j, k)), wpr_, last_mask_, ax);
          if (rm != 0.0) plane += ax.w[static_cast<std::size_t>(j)] * rm;
        }
        total += ax.w[static_cast<std::size_t>(k)] * plane;
      }
    }
    if (includes_tail_) total += tail_mass();
    return total;
  }

  /// measure_value plus an error budget: the mass of the cells on either
  /// side of the occupancy interface (where a discretized boundary can
  /// misclassify), plus the tail bound when the set does not account for
  /// the region beyond the box.
  MeasureEstimate measure() const {
    MeasureEstimate est;
    est.value = measure_value();
    GridSet eroded = *this;
    eroded.erode_l1_step();
    GridSet dilated = *this;
    dilated.dilate_l1_step();
    const detail::AxisWeights ax(nx_, spec_.delta);
    double interface_mass = 0.0;
    for (std::int64_t r = 0; r < nrows_; ++r) {
      const std::uint64_t* a = row(r);
      const std::uint64_t* er = eroded.row(r);
      const std::uint64_t* dl = dilated.row(r);
      const double wy = axis_weight(ax, r);
      double rm = 0.0;
      for (int w = 0; w < wpr_; ++w) {
        std::uint64_t bits = (a[w] & ~er[w]) | (dl[w] & ~a[w]);
        if (!bits) continue;
        const int base = w << 6;
        while (bits) {
          rm += ax.w[static_cast<std::size_t>(base + std::countr_zero(bits))];
          bits &= bits - 1;
        }
      }
      interface_mass += wy * rm;
    }
    est.error_bound = interface_mass + (includes_tail_ ? 0.0 : spec_.tail_bound);
    return est;
  }

  /// One in-place dilation step by the 2n-cell cross (grid l1 radius 1).
  void dilate_l1_step() {
    if (spec_.n == 2) {
      std::vector<std::uint64_t> prev(static_cast<std::size_t>(wpr_), 0ull);  // row j-1 originals
      std::vector<std::uint64_t> cur(static_cast<std::size_t>(wpr_));
      for (int j = 0; j < nx_; ++j) {
        std::uint64_t* r = row(j);
        std::copy(r, r + wpr_, cur.begin());
        detail::row_or_shl1(r, cur.data(), wpr_);
        detail::row_or_shr1(r, cur.data(), wpr_, nx_, includes_tail_);
        detail::row_or(r, prev.data(), wpr_);
        if (j + 1 < nx_) {
          detail::row_or(r, row(j + 1), wpr_);
        } else if (includes_tail_) {
          for (int w = 0; w < wpr_; ++w) r[w] = ~0ull;
        }
        r[wpr_ - 1] &= last_mask_;
        std::swap(prev, cur);
      }
    } else {
      dilate_l1_step_3d();
    }
  }

  /// One in-place step by a directional cone of T: {0, +e1, +e2, (+e3)} or
  /// its negative.
  void dilate_cone_step(bool positive) {
    if (spec_.n == 2) {
      std::vector<std::uint64_t> adj(static_cast<std::size_t>(wpr_), 0ull);
      std::vector<std::uint64_t> cur(static_cast<std::size_t>(wpr_));
      if (!positive && includes_tail_) adj.assign(adj.size(), ~0ull);  // row nx is tail
      const int j0 = positive ? 0 : nx_ - 1;
      const int step = positive ? 1 : -1;
      for (int j = j0; j >= 0 && j < nx_; j += step) {
        std::uint64_t* r = row(j);
        std::copy(r, r + wpr_, cur.begin());
        if (positive) {
          detail::row_or_shl1(r, cur.data(), wpr_);
        } else {
          detail::row_or_shr1(r, cur.data(), wpr_, nx_, includes_tail_);
        }
        detail::row_or(r, adj.data(), wpr_);
        r[wpr_ - 1] &= last_mask_;
        std::swap(adj, cur);
      }
    } else {
      dilate_cone_step_3d(positive);
    }
  }

  /// One in-place erosion step (dual of dilate_l1_step; the orthant wall is
  /// not an interface, the truncation wall follows includes_tail).
  void erode_l1_step() {
    if (spec_.n == 2) {
      std::vector<std::uint64_t> prev(static_cast<std::size_t>(wpr_), ~0ull);  // j-1 = orthant wall
      std::vector<std::uint64_t> cur(static_cast<std::size_t>(wpr_));
      for (int j = 0; j < nx_; ++j) {
        std::uint64_t* r = row(j);
        std::copy(r, r + wpr_, cur.begin());
        detail::row_and_shl1(r, cur.data(), wpr_);
        detail::row_and_shr1(r, cur.data(), wpr_, nx_, includes_tail_);
        detail::row_and(r, prev.data(), wpr_);
        if (j + 1 < nx_) {
          detail::row_and(r, row(j + 1), wpr_);
        } else if (!includes_tail_) {
          std::fill(r, r + wpr_, 0ull);
        }
        r[wpr_ - 1] &= last_mask_;
        std::swap(prev, cur);
      }
    } else {
      erode_l1_step_3d();
    }
  }

  /// A^h for h = k*delta; dilation of a tail-including set keeps the tail.
  GridSet dilate_l1(double h) const {
    const int k = steps_for(h);
    GridSet out = *this;
    for (int s = 0; s < k; ++s) out.dilate_l1_step();
    return out;
  }

  /// A + hT, n = 2 only: union of the two directional cone dilations.
  GridSet dilate_T(double h) const {
    if (spec_.n != 2) throw std::invalid_argument("dilate_T: defined for n = 2 only");
    const int k = steps_for(h);
    GridSet pos = *this;
    GridSet neg = *this;
    for (int s = 0; s < k; ++s) {
      pos.dilate_cone_step(true);
      neg.dilate_cone_step(false);
    }
    for (std::size_t w = 0; w < pos.bits_.size(); ++w) pos.bits_[w] |= neg.bits_[w];
    return pos;
  }

  GridSet dilate(double h, DilationMetric metric) const {
    return metric == DilationMetric::l1 ? dilate_l1(h) : dilate_T(h);
  }

  /// Exact grid l1 distance (in multiples of delta) to the nearest occupied
  /// cell, by one forward and one backward chamfer sweep.  Row-major layout
  /// matching cell indices.
  std::vector<std::int32_t> l1_distance_field() const {
    if (empty() && !includes_tail_) throw std::invalid_argument("l1_distance_field: empty set");
    const std::int32_t inf = std::numeric_limits<std::int32_t>::max() / 4;
    std::vector<std::int32_t> d(static_cast<std::size_t>(nrows_) * static_cast<std::size_t>(nx_), inf);
    const int nz = spec_.n == 3 ? nx_ : 1;
    auto at = [&](int i, int j, int k) -> std::int32_t& {
      return d[static_cast<std::size_t>(row_index(j, k)) * static_cast<std::size_t>(nx_) +
               static_cast<std::size_t>(i)];
    };
    for (int k = 0; k < nz; ++k) {
      for (int j = 0; j < nx_; ++j) {
        for (int i = 0; i < nx_; ++i) {
          if (cell(i, j, k)) {
            at(i, j, k) = 0;
          } else if (includes_tail_) {
            std::int32_t t = std::min(nx_ - i, nx_ - j);
            if (spec_.n == 3) t = std::min(t, nx_ - k);
            at(i, j, k) = t;
          }
        }
      }
    }
    for (int k = 0; k < nz; ++k) {
      for (int j = 0; j < nx_; ++j) {
        for (int i = 0; i < nx_; ++i) {
          std::int32_t v = at(i, j, k);
          if (i > 0) v = std::min(v, at(i - 1, j, k) + 1);
          if (j > 0) v = std::min(v, at(i, j - 1, k) + 1);
          if (k > 0) v = std::min(v, at(i, j, k - 1) + 1);
          at(i, j, k) = v;
        }
      }
    }
    for (int k = nz - 1; k >= 0; --k) {
      for (int j = nx_ - 1; j >= 0; --j) {
        for (int i = nx_ - 1; i >= 0; --i) {
          std::int32_t v = at(i, j, k);
          if (i + 1 < nx_) v = std::min(v, at(i + 1, j, k) + 1);
          if (j + 1 < nx_) v = std::min(v, at(i, j + 1, k) + 1);
          if (k + 1 < nz) v = std::min(v, at(i, j, k + 1) + 1);
          at(i, j, k) = v;
        }
      }
    }
    return d;
  }

  GridSet union_with(const GridSet& o) const {
    require_same_spec(o, "union_with");
    GridSet out = *this;
    for (std::size_t w = 0; w < bits_.size(); ++w) out.bits_[w] |= o.bits_[w];
    out.includes_tail_ = includes_tail_ || o.includes_tail_;
    return out;
  }

  GridSet complement() const {
    GridSet out(spec_, !includes_tail_);
    for (std::int64_t r = 0; r < nrows_; ++r) {
      const std::uint64_t* src = row(r);
      std::uint64_t* dst = out.row(r);
      for (int w = 0; w < wpr_; ++w) dst[w] = ~src[w];
      dst[wpr_ - 1] &= last_mask_;
    }
    return out;
  }

  /// 2n-neighbor flood fill; components sorted by decreasing measure.  When
  /// the set includes the tail, the tail belongs to the component touching
  /// the far faces.
  std::vector<GridSet> connected_components() const;

  /// A - k*delta*e1.  Requires every occupied cell to have x index >= k.
  GridSet shift_down_x(int k) const {
    if (k < 0) throw std::invalid_argument("shift_down_x: k must be >= 0");
    GridSet out(spec_, includes_tail_);
    for (std::int64_t r = 0; r < nrows_; ++r) {
      const std::uint64_t* src = row(r);
      std::uint64_t* dst = out.row(r);
      for (int i = 0; i < k; ++i) {
        if ((src[i >> 6] >> (i & 63)) & 1ull) {
          throw std::invalid_argument("shift_down_x: shift would leave the orthant");
        }
      }
      const int wshift = k >> 6, bshift = k & 63;
      for (int w = 0; w < wpr_; ++w) {
        std::uint64_t v = 0;
        if (w + wshift < wpr_) {
          v = src[w + wshift] >> bshift;
          if (bshift && w + wshift + 1 < wpr_) v |= src[w + wshift + 1] << (64 - bshift);
        }
        dst[w] = v;
      }
      dst[wpr_ - 1] &= last_mask_;
    }
    return out;
  }

  // Internal row access for the profile and verifier modules.
  std::int64_t row_index(int j, int k = 0) const {
    return spec_.n == 2 ? j : static_cast<std::int64_t>(k) * nx_ + j;
  }
  const std::uint64_t* row(std::int64_t r) const { return bits_.data() + static_cast<std::size_t>(r) * wpr_; }
  std::uint64_t* row(std::int64_t r) { return bits_.data() + static_cast<std::size_t>(r) * wpr_; }
  int words_per_row() const { return wpr_; }
  std::uint64_t last_word_mask() const { return last_mask_; }

  double tail_mass() const {
    const double box = 1.0 - std::exp(-spec_.x_max);
    double m = box;
    for (int i = 1; i < spec_.n; ++i) m *= box;
    return 1.0 - m;
  }

  int steps_for(double h) const {
    const long long k = std::llround(h / spec_.delta);
    if (k < 1 || std::abs(h - static_cast<double>(k) * spec_.delta) > 1e-9 * std::max(spec_.delta, h)) {
      throw std::invalid_argument("dilation radius must be a positive multiple of delta");
    }
    return static_cast<int>(k);
  }

 private:
  void require_same_spec(const GridSet& o, const char* who) const {
    if (!(spec_ == o.spec_)) throw std::invalid_argument(std::string(who) + ": grid specs differ");
  }

  void require_tail_consistency(const char* who) const {
    const int nz = spec_.n == 3 ? nx_ : 1;
    bool ok = true;
    for (int k = 0; k < nz && ok; ++k) {
      for (int j = 0; j < nx_ && ok; ++j) {
        if (j == nx_ - 1 || (spec_.n == 3 && k == nz - 1)) {
          const std::uint64_t* r = row(row_index(j, k));
          for (int w = 0; w < wpr_; ++w) {
            const std::uint64_t full = (w + 1 == wpr_) ? last_mask_ : ~0ull;
            if (r[w] != full) {
              ok = false;
              break;
            }
          }
        } else if (!cell(nx_ - 1, j, k)) {
          ok = false;
        }
      }
    }
    if (!ok) {
      throw std::invalid_argument(std::string(who) +
                                  ": includes_tail set but far-face cells are not fully occupied");
    }
  }

  double axis_weight(const detail::AxisWeights& ax, std::int64_t r) const {
    if (spec_.n == 2) return ax.w[static_cast<std::size_t>(r)];
    const int j = static_cast<int>(r % nx_);
    const int k = static_cast<int>(r / nx_);
    return ax.w[static_cast<std::size_t>(j)] * ax.w[static_cast<std::size_t>(k)];
  }

  void add_ball(const Point& c, double r) {
    const double d = spec_.delta;
    if (spec_.n == 2) {
      for (int j = 0; j < nx_; ++j) {
        const double rem = r - std::abs((j + 0.5) * d - c[1]);
        if (rem < 0.0) continue;
        fill_centered_run(c[0], rem, j, 0);
      }
    } else {
      for (int k = 0; k < nx_; ++k) {
        const double rem_k = r - std::abs((k + 0.5) * d - c[2]);
        if (rem_k < 0.0) continue;
        for (int j = 0; j < nx_; ++j) {
          const double rem = rem_k - std::abs((j + 0.5) * d - c[1]);
          if (rem < 0.0) continue;
          fill_centered_run(c[0], rem, j, k);
        }
      }
    }
  }

  // Occupies the x cells whose centers lie within rem of cx.
  void fill_centered_run(double cx, double rem, int j, int k) {
    const double d = spec_.delta;
    int lo = static_cast<int>(std::ceil((cx - rem) / d - 0.5));
    int hi = static_cast<int>(std::floor((cx + rem) / d - 0.5));
    while (lo - 1 >= 0 && std::abs((lo - 0.5) * d - cx) <= rem) --lo;
    while (std::abs((lo + 0.5) * d - cx) > rem && lo <= hi) ++lo;
    while (hi + 1 < nx_ && std::abs((hi + 1.5) * d - cx) <= rem) ++hi;
    while (hi >= lo && std::abs((hi + 0.5) * d - cx) > rem) --hi;
    fill_x_run(lo, hi + 1, j, k);
  }

  void dilate_l1_step_3d() {
    const std::size_t plane_words = static_cast<std::size_t>(nx_) * static_cast<std::size_t>(wpr_);
    std::vector<std::uint64_t> prev_plane(plane_words, 0ull);
    std::vector<std::uint64_t> cur_plane(plane_words);
    std::vector<std::uint64_t> prev_row(static_cast<std::size_t>(wpr_));
    for (int k = 0; k < nx_; ++k) {
      std::copy(row(row_index(0, k)), row(row_index(0, k)) + static_cast<std::int64_t>(plane_words),
                cur_plane.begin());
      std::fill(prev_row.begin(), prev_row.end(), 0ull);
      for (int j = 0; j < nx_; ++j) {
        std::uint64_t* r = row(row_index(j, k));
        const std::uint64_t* orig = cur_plane.data() + static_cast<std::size_t>(j) * wpr_;
        detail::row_or_shl1(r, orig, wpr_);
        detail::row_or_shr1(r, orig, wpr_, nx_, includes_tail_);
        detail::row_or(r, prev_row.data(), wpr_);
        if (j + 1 < nx_) {
          detail::row_or(r, cur_plane.data() + static_cast<std::size_t>(j + 1) * wpr_, wpr_);
        } else if (includes_tail_) {
          for (int w = 0; w < wpr_; ++w) r[w] = ~0ull;
        }
        detail::row_or(r, prev_plane.data() + static_cast<std::size_t>(j) * wpr_, wpr_);
        if (k + 1 < nx_) {
          detail::row_or(r, row(row_index(j, k + 1)), wpr_);
        } else if (includes_tail_) {
          for (int w = 0; w < wpr_; ++w) r[w] = ~0ull;
        }
        r[wpr_ - 1] &= last_mask_;
        std::copy(orig, orig + wpr_, prev_row.begin());
      }
      std::swap(prev_plane, cur_plane);
    }
  }

  void dilate_cone_step_3d(bool positive) {
    const std::size_t plane_words = static_cast<std::size_t>(nx_) * static_cast<std::size_t>(wpr_);
    std::vector<std::uint64_t> adj_plane(plane_words, 0ull);
    std::vector<std::uint64_t> cur_plane(plane_words);
    std::vector<std::uint64_t> adj_row(static_cast<std::size_t>(wpr_));
    if (!positive && includes_tail_) adj_plane.assign(plane_words, ~0ull);
    const int k0 = positive ? 0 : nx_ - 1;
    const int step = positive ? 1 : -1;
    for (int k = k0; k >= 0 && k < nx_; k += step) {
      std::copy(row(row_index(0, k)), row(row_index(0, k)) + static_cast<std::int64_t>(plane_words),
                cur_plane.begin());
      if (positive) {
        std::fill(adj_row.begin(), adj_row.end(), 0ull);
      } else {
        adj_row.assign(static_cast<std::size_t>(wpr_), includes_tail_ ? ~0ull : 0ull);
      }
      const int j0 = positive ? 0 : nx_ - 1;
      for (int j = j0; j >= 0 && j < nx_; j += step) {
        std::uint64_t* r = row(row_index(j, k));
        const std::uint64_t* orig = cur_plane.data() + static_cast<std::size_t>(j) * wpr_;
        if (positive) {
          detail::row_or_shl1(r, orig, wpr_);
        } else {
          detail::row_or_shr1(r, orig, wpr_, nx_, includes_tail_);
        }
        detail::row_or(r, adj_row.data(), wpr_);
        detail::row_or(r, adj_plane.data() + static_cast<std::size_t>(j) * wpr_, wpr_);
        r[wpr_ - 1] &= last_mask_;
        std::copy(orig, orig + wpr_, adj_row.begin());
      }
      std::swap(adj_plane, cur_plane);
    }
  }

  void erode_l1_step_3d() {
    const std::size_t plane_words = static_cast<std::size_t>(nx_) * static_cast<std::size_t>(wpr_);
    std::vector<std::uint64_t> prev_plane(plane_words, ~0ull);
    std::vector<std::uint64_t> cur_plane(plane_words);
    std::vector<std::uint64_t> prev_row(static_cast<std::size_t>(wpr_));
    for (int k = 0; k < nx_; ++k) {
      std::copy(row(row_index(0, k)), row(row_index(0, k)) + static_cast<std::int64_t>(plane_words),
                cur_plane.begin());
      std::fill(prev_row.begin(), prev_row.end(), ~0ull);
      for (int j = 0; j < nx_; ++j) {
        std::uint64_t* r = row(row_index(j, k));
        const std::uint64_t* orig = cur_plane.data() + static_cast<std::size_t>(j) * wpr_;
        detail::row_and_shl1(r, orig, wpr_);
        detail::row_and_shr1(r, orig, wpr_, nx_, includes_tail_);
        detail::row_and(r, prev_row.data(), wpr_);
        if (j + 1 < nx_) {
          detail::row_and(r, cur_plane.data() + static_cast<std::size_t>(j + 1) * wpr_, wpr_);
        } else if (!includes_tail_) {
          std::fill(r, r + wpr_, 0ull);
        }
        detail::row_and(r, prev_plane.data() + static_cast<std::size_t>(j) * wpr_, wpr_);
        if (k + 1 < nx_) {
          detail::row_and(r, row(row_index(j, k + 1)), wpr_);
        } else if (!includes_tail_) {
          std::fill(r, r + wpr_, 0ull);
        }
        r[wpr_ - 1] &= last_mask_;
        std::copy(orig, orig + wpr_, prev_row.begin());
      }
      std::swap(prev_plane, cur_plane);
    }
  }

  GridSpec spec_;
  bool includes_tail_;
  int nx_;
  int wpr_;
  std::int64_t nrows_;
  std::uint64_t last_mask_;
  std::vector<std::uint64_t> bits_;
};

namespace detail {

struct RunDsu {
  std::vector<std::int32_t> parent;
  std::int32_t add() {
    parent.push_back(static_cast<std::int32_t>(parent.size()));
    return parent.back();
  }
  std::int32_t find(std::int32_t x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  }
  void unite(std::int32_t a, std::int32_t b) { parent[static_cast<std::size_t>(find(a))] = find(b); }
};

struct Run {
  std::int32_t begin, end;  // x indices, [begin, end)
  std::int32_t label;
};

inline void extract_runs(const std::uint64_t* row, int /*wpr*/, int nx, std::vector<Run>& out) {
  out.clear();
  int i = 0;
  while (i < nx) {
    // skip zeros
    while (i < nx) {
      const std::uint64_t w = row[i >> 6] >> (i & 63);
      if (w == 0) {
        i = (i | 63) + 1;
      } else {
        i += std::countr_zero(w);
        break;
      }
    }
    if (i >= nx) break;
    const int start = i;
    while (i < nx) {
      const std::uint64_t w = row[i >> 6] >> (i & 63);
      if (~w == 0) {
        i = (i | 63) + 1;
      } else {
        const int ones = std::countr_one(w);
        i += ones;
        if (((i - 1) & 63) != 63 || ones == 0) break;
      }
    }
    i = std::min(i, nx);
    out.push_back(Run{start, i, -1});
  }
}

}  // namespace detail

inline std::vector<GridSet> GridSet::connected_components() const {
  const int nz = spec_.n == 3 ? nx_ : 1;
  detail::RunDsu dsu;
  const std::int32_t tail_node = includes_tail_ ? dsu.add() : -1;

  std::vector<std::vector<detail::Run>> plane_prev;  // runs of plane k-1, by j
  std::vector<std::vector<detail::Run>> plane_cur;
  std::vector<std::vector<std::int64_t>> run_rows;   // per label: packed (row, begin, end)
  std::vector<detail::Run> scratch;

  plane_prev.assign(static_cast<std::size_t>(nx_), {});
  plane_cur.assign(static_cast<std::size_t>(nx_), {});

  for (int k = 0; k < nz; ++k) {
    for (int j = 0; j < nx_; ++j) {
      detail::extract_runs(row(row_index(j, k)), wpr_, nx_, scratch);
      for (auto& run : scratch) {
        run.label = dsu.add();
        run_rows.push_back({});
        run_rows.back().push_back(row_index(j, k));
        run_rows.back().push_back(run.begin);
        run_rows.back().push_back(run.end);
        if (includes_tail_) {
          const bool touches = run.end == nx_ || j == nx_ - 1 || (spec_.n == 3 && k == nz - 1);
          if (touches) dsu.unite(run.label, tail_node);
        }
      }
      auto link = [&](const std::vector<detail::Run>& other) {
        std::size_t oi = 0;
        for (const auto& run : scratch) {
          while (oi < other.size() && other[oi].end <= run.begin) ++oi;
          std::size_t oj = oi;
          while (oj < other.size() && other[oj].begin < run.end) {
            dsu.unite(run.label, other[oj].label);
            ++oj;
          }
          if (oj > oi) oi = oj - 1;
        }
      };
      if (j > 0) link(plane_cur[static_cast<std::size_t>(j - 1)]);
      if (k > 0) link(plane_prev[static_cast<std::size_t>(j)]);
      plane_cur[static_cast<std::size_t>(j)] = scratch;
    }
    std::swap(plane_prev, plane_cur);
  }

  // Group runs by root and materialize.
  std::vector<std::int32_t> roots;
  std::vector<std::int32_t> root_of(dsu.parent.size());
  for (std::size_t lbl = 0; lbl < dsu.parent.size(); ++lbl) {
    root_of[lbl] = dsu.find(static_cast<std::int32_t>(lbl));
  }
  std::vector<std::int32_t> order;
  std::vector<std::int32_t> comp_index(dsu.parent.size(), -1);
  std::vector<GridSet> comps;
  auto comp_for = [&](std::int32_t root) -> GridSet& {
    if (comp_index[static_cast<std::size_t>(root)] < 0) {
      comp_index[static_cast<std::size_t>(root)] = static_cast<std::int32_t>(comps.size());
      comps.emplace_back(spec_, includes_tail_ && root == root_of[static_cast<std::size_t>(tail_node)]);
    }
    return comps[static_cast<std::size_t>(comp_index[static_cast<std::size_t>(root)])];
  };
  if (includes_tail_) comp_for(root_of[static_cast<std::size_t>(tail_node)]);
  const std::int32_t first_run_label = includes_tail_ ? 1 : 0;
  for (std::size_t lbl = static_cast<std::size_t>(first_run_label); lbl < dsu.parent.size(); ++lbl) {
    GridSet& comp = comp_for(root_of[lbl]);
    const auto& rr = run_rows[lbl - static_cast<std::size_t>(first_run_label)];
    const std::int64_t rowidx = rr[0];
    const int jj = spec_.n == 2 ? static_cast<int>(rowidx) : static_cast<int>(rowidx % nx_);
    const int kk = spec_.n == 2 ? 0 : static_cast<int>(rowidx / nx_);
    comp.fill_x_run(static_cast<int>(rr[1]), static_cast<int>(rr[2]), jj, kk);
  }
  std::vector<double> masses(comps.size());
  for (std::size_t c = 0; c < comps.size(); ++c) masses[c] = comps[c].measure_value();
  std::vector<std::size_t> idx(comps.size());
  std::iota(idx.begin(), idx.end(), 0u);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return masses[a] > masses[b]; });
  std::vector<GridSet> sorted;
  sorted.reserve(comps.size());
  for (auto c : idx) sorted.push_back(std::move(comps[c]));
  return sorted;
}

/// Finite-difference boundary estimate: d_k = (nu(A^{k delta}) - nu(A)) / (k delta)
/// for k in {2,4,8}, Richardson-extrapolated at the two smallest rungs.  The
/// error bound combines the rung spread with the measure error budgets and is
/// deliberately conservative; the estimate is an interval, never a bare number.
struct BoundaryEstimate {
  double value = 0.0;
  double error_bound = 0.0;
  std::array<double, 3> rung_values{};
};

inline BoundaryEstimate boundary_estimate(const GridSet& a, DilationMetric metric) {
  if (metric == DilationMetric::T && a.spec().n != 2) {
    throw std::invalid_argument("boundary_estimate: T metric is n = 2 only");
  }
  const double d = a.spec().delta;
  const MeasureEstimate m0 = a.measure();
  std::array<int, 3> ks{2, 4, 8};
  std::array<MeasureEstimate, 3> mk;
  if (metric == DilationMetric::l1) {
    GridSet cur = a;
    int done = 0;
    for (std::size_t r = 0; r < ks.size(); ++r) {
      while (done < ks[r]) {
        cur.dilate_l1_step();
        ++done;
      }
      mk[r] = cur.measure();
    }
  } else {
    GridSet pos = a;
    GridSet neg = a;
    int done = 0;
    for (std::size_t r = 0; r < ks.size(); ++r) {
      while (done < ks[r]) {
        pos.dilate_cone_step(true);
        neg.dilate_cone_step(false);
        ++done;
      }
      mk[r] = pos.union_with(neg).measure();
    }
  }
  BoundaryEstimate est;
  std::array<double, 3> dk;
  for (std::size_t r = 0; r < ks.size(); ++r) {
    dk[r] = (mk[r].value - m0.value) / (ks[r] * d);
  }
  est.rung_values = dk;
  est.value = 2.0 * dk[0] - dk[1];
  est.error_bound = std::abs(dk[0] - dk[1]) + std::abs(dk[1] - dk[2]) +
                    (m0.error_bound + mk[0].error_bound) / (2.0 * d);
  return est;
}

}  // namespace expiso
