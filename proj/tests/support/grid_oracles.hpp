#pragma once

#include <cstdint>
#include <vector>

#include "expiso/grid.hpp"

// Brute-force counterparts of the grid morphology, quadratic or worse in the
// cell count; only usable on small grids.

namespace oracle {

struct SplitMix {
  std::uint64_t state;
  explicit SplitMix(std::uint64_t seed) : state(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  int uniform_int(int lo, int hi) {  // inclusive
    return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1));
  }
};

inline expiso::GridSet random_cells(const expiso::GridSpec& spec, double density, std::uint64_t seed,
                                    bool includes_tail = false) {
  expiso::GridSet out(spec, includes_tail);
  SplitMix rng(seed);
  const int nz = spec.n == 3 ? spec.cells : 1;
  for (int k = 0; k < nz; ++k) {
    for (int j = 0; j < spec.cells; ++j) {
      for (int i = 0; i < spec.cells; ++i) {
        if (rng.uniform() < density) out.set_cell(i, j, k);
      }
    }
  }
  if (includes_tail) {
    for (int k = 0; k < nz; ++k) {
      for (int j = 0; j < spec.cells; ++j) {
        for (int i = 0; i < spec.cells; ++i) {
          if (i == spec.cells - 1 || j == spec.cells - 1 || (spec.n == 3 && k == spec.cells - 1)) {
            out.set_cell(i, j, k);
          }
        }
      }
    }
  }
  return out;
}

/// Random staircase (downward-closed) set: complement of an upper set.
inline expiso::GridSet random_staircase(const expiso::GridSpec& spec, std::uint64_t seed) {
  expiso::GridSet out(spec, false);
  SplitMix rng(seed);
  int height = rng.uniform_int(0, spec.cells);
  for (int i = 0; i < spec.cells; ++i) {
    height = std::max(0, height - rng.uniform_int(0, 2));
    out.fill_x_run(i, i + 1, 0);
    for (int j = 0; j < height; ++j) out.set_cell(i, j);
  }
  return out;
}

enum class Body { l1, T };

/// Pointwise-membership dilation: target occupied iff some source within the
/// body of grid radius k (tail cells beyond the box included when declared).
inline expiso::GridSet brute_dilate(const expiso::GridSet& a, int k, Body body) {
  const auto& spec = a.spec();
  const int nx = spec.cells;
  const int nz = spec.n == 3 ? nx : 1;
  expiso::GridSet out(spec, a.includes_tail());
  auto source = [&](int i, int j, int kk) {
    if (i < 0 || j < 0 || kk < 0) return false;
    if (i >= nx || j >= nx || kk >= nz) return a.includes_tail();
    return a.cell(i, j, kk);
  };
  auto in_body = [&](int di, int dj, int dk) {
    const int norm = std::abs(di) + std::abs(dj) + std::abs(dk);
    if (norm > k) return false;
    if (body == Body::l1) return true;
    const bool nonneg = di >= 0 && dj >= 0 && dk >= 0;
    const bool nonpos = di <= 0 && dj <= 0 && dk <= 0;
    return nonneg || nonpos;
  };
  for (int kk = 0; kk < nz; ++kk) {
    for (int j = 0; j < nx; ++j) {
      for (int i = 0; i < nx; ++i) {
        bool hit = false;
        for (int dk = -k; dk <= k && !hit; ++dk) {
          if (spec.n == 2 && dk != 0) continue;
          for (int dj = -k; dj <= k && !hit; ++dj) {
            for (int di = -k; di <= k && !hit; ++di) {
              if (in_body(di, dj, dk) && source(i - di, j - dj, kk - dk)) hit = true;
            }
          }
        }
        if (hit) out.set_cell(i, j, kk);
      }
    }
  }
  return out;
}

/// All-pairs l1 distance, in cell units.
inline std::vector<std::int32_t> brute_distance(const expiso::GridSet& a) {
  const int nx = a.spec().cells;
  const int nz = a.spec().n == 3 ? nx : 1;
  std::vector<std::int32_t> d(static_cast<std::size_t>(nx) * nx * nz, 1 << 28);
  for (int kk = 0; kk < nz; ++kk) {
    for (int j = 0; j < nx; ++j) {
      for (int i = 0; i < nx; ++i) {
        auto& cur = d[(static_cast<std::size_t>(kk) * nx + j) * nx + i];
        if (a.includes_tail()) {
          cur = std::min({cur, nx - i, nx - j, a.spec().n == 3 ? nx - kk : (1 << 28)});
        }
        for (int k2 = 0; k2 < nz; ++k2) {
          for (int j2 = 0; j2 < nx; ++j2) {
            for (int i2 = 0; i2 < nx; ++i2) {
              if (a.cell(i2, j2, k2)) {
                cur = std::min(cur, std::abs(i - i2) + std::abs(j - j2) + std::abs(kk - k2));
              }
            }
          }
        }
      }
    }
  }
  return d;
}

}  // namespace oracle
