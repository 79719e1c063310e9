#pragma once

#include <cstdint>
#include <vector>

#include "torus.hpp"

namespace fvca {

// splitmix64: tiny, portable, bit-stable across platforms
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline double u64_to_unit_centered(std::uint64_t u) {
  return (double)(u >> 11) * (1.0 / 9007199254740992.0) - 0.5;  // [-1/2, 1/2)
}

// One disorder configuration: per-cell, per-channel uniforms on [-1/2, 1/2].
struct DisorderConfig {
  long cells = 0;
  int channels = 0;
  std::vector<double> w;  // cells x channels, cell-major
  std::uint64_t master_seed = 0;
  long index = 0;

  double at(long cell, int ch) const { return w[cell * channels + ch]; }

  // (tau_y omega)_c = omega_{c-y}: the config seen after translating the
  // operator by y.
  DisorderConfig shifted(const std::vector<int>& y, const TorusGeometry& g) const {
    DisorderConfig out = *this;
    for (long c = 0; c < cells; ++c) {
      std::vector<int> x = g.cell_coords(c);
      for (int j = 0; j < g.d; ++j) x[j] = (int)(((long)x[j] - y[j]) % g.sizes[j] + g.sizes[j]) % g.sizes[j];
      long src = g.cell_index(x);
      for (int ch = 0; ch < channels; ++ch) out.w[c * channels + ch] = at(src, ch);
    }
    return out;
  }

  static DisorderConfig zero(long cells, int channels) {
    DisorderConfig cfg;
    cfg.cells = cells;
    cfg.channels = channels;
    cfg.w.assign((size_t)cells * channels, 0.0);
    return cfg;
  }
};

// Counter-based seeding: the per-config stream depends only on
// (master_seed, index), so ensembles are order-independent and resumable.
inline std::uint64_t config_seed(std::uint64_t master_seed, long index) {
  std::uint64_t s = master_seed;
  std::uint64_t a = splitmix64(s);
  s = a ^ (0x9E3779B97F4A7C15ULL * (std::uint64_t)(index + 1));
  return splitmix64(s);
}

inline DisorderConfig sample_config(std::uint64_t master_seed, long index, long cells, int channels) {
  DisorderConfig cfg;
  cfg.cells = cells;
  cfg.channels = channels;
  cfg.master_seed = master_seed;
  cfg.index = index;
  cfg.w.resize((size_t)cells * channels);
  std::uint64_t state = config_seed(master_seed, index);
  for (double& v : cfg.w) v = u64_to_unit_centered(splitmix64(state));
  return cfg;
}

}  // namespace fvca
