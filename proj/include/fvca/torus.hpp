#pragma once

#include <numeric>
#include <vector>

#include "common.hpp"

namespace fvca {

// Finite torus of cells with an N-dimensional fiber on each cell.
// Site ordering is cell-major, fiber-minor; cells are lexicographic with the
// first coordinate slowest.
struct TorusGeometry {
  int d = 0;
  std::vector<int> sizes;  // M_1..M_d, each >= 2
  int N = 1;

  TorusGeometry() = default;
  TorusGeometry(std::vector<int> sizes_, int fiber) : d((int)sizes_.size()), sizes(std::move(sizes_)), N(fiber) {
    if (d < 1 || d > 4) throw ConfigError("torus dimension must be 1..4");
    for (int M : sizes)
      if (M < 2) throw ConfigError("torus size must be >= 2");
    if (N < 1) throw ConfigError("fiber dimension must be >= 1");
  }

  long cells() const {
    return std::accumulate(sizes.begin(), sizes.end(), 1L, std::multiplies<long>());
  }
  long dim() const { return cells() * N; }

  // lexicographic cell index <-> multi-index (coordinates in [0, M_j))
  long cell_index(const std::vector<int>& x) const {
    long c = 0;
    for (int j = 0; j < d; ++j) c = c * sizes[j] + x[j];
    return c;
  }
  std::vector<int> cell_coords(long c) const {
    std::vector<int> x(d);
    for (int j = d - 1; j >= 0; --j) {
      x[j] = (int)(c % sizes[j]);
      c /= sizes[j];
    }
    return x;
  }
  long site(long cell, int alpha) const { return cell * N + alpha; }

  bool operator==(const TorusGeometry& o) const { return d == o.d && sizes == o.sizes && N == o.N; }
};

// Representative of diff mod M with minimal absolute value; the even-M tie at
// M/2 is broken toward -M/2, giving values in [-floor(M/2), ceil(M/2)-1].
inline int wrap1(long diff, int M) {
  int r = (int)(((diff % M) + M) % M);
  if (r >= (M + 1) / 2) r -= M;
  return r;
}

inline std::vector<int> wrap_displacement(const std::vector<int>& x, const std::vector<int>& xp,
                                          const TorusGeometry& g) {
  std::vector<int> y(g.d);
  for (int j = 0; j < g.d; ++j) y[j] = wrap1((long)x[j] - xp[j], g.sizes[j]);
  return y;
}

}  // namespace fvca
