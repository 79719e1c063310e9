#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "torus.hpp"

namespace fvca {

// Antisymmetric rational flux matrix f_ij = n_ij / M, kept exact as integers.
//
// Magnetic phases use the seam-free bilinear gauge
//   B(y, x) = sum_{i<j} phi_ij y_i x_j,  phi_ij = 2 pi n_ij / M_j,
// which satisfies U_i U_j = e^{i phi_ij} U_j U_i and U_j^{M_j} = 1 exactly on
// the torus when the flux is quantized (the half-angle symmetric form
// (1/2) sum phi_ij y_i x_j is not single-valued mod 2pi for odd n_ij).
struct FluxMatrix {
  int d = 0;
  std::vector<int> sizes;           // torus sizes the quantization refers to
  std::vector<std::vector<int>> n;  // integer numerators, antisymmetric

  FluxMatrix() = default;
  explicit FluxMatrix(const TorusGeometry& g)
      : d(g.d), sizes(g.sizes), n(g.d, std::vector<int>(g.d, 0)) {}

  void set(int i, int j, int nij) {
    if (i == j && nij != 0) throw ConfigError("flux matrix diagonal must vanish");
    if (i == j) return;
    if (sizes[i] != sizes[j])
      throw FluxNotQuantized("flux between directions of unequal torus size is not quantized");
    n[i][j] = nij;
    n[j][i] = -nij;
  }

  double phi(int i, int j) const { return 2.0 * pi * n[i][j] / sizes[j]; }
  double fraction(int i, int j) const { return (double)n[i][j] / sizes[j]; }
  bool is_zero() const {
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        if (n[i][j] != 0) return false;
    return true;
  }

  void check_quantized(const TorusGeometry& g) const {
    if (d != g.d) throw FluxNotQuantized("flux matrix dimension mismatch");
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        if (n[i][j] != -n[j][i]) throw FluxNotQuantized("flux matrix not antisymmetric");
        if (n[i][j] != 0 && (sizes[i] != g.sizes[i] || sizes[j] != g.sizes[j]))
          throw FluxNotQuantized("flux quantized for a different torus");
      }
  }

  // B(y, x), single-valued mod 2pi in x for quantized flux
  template <class VecA, class VecB>
  double gauge_form(const VecA& y, const VecB& x) const {
    double s = 0.0;
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j)
        if (n[i][j] != 0) s += phi(i, j) * y[i] * x[j];
    return s;
  }

  // Peierls phase of the hop entering <row|H|row-y>
  double hop_phase(const std::vector<int>& y, const std::vector<int>& row) const {
    return gauge_form(y, row) - 0.5 * gauge_form(y, y);
  }
};

// n = round(target*M); the quantized fraction n/M is within 1/(2M) of target.
inline std::pair<int, double> quantize_flux(double target, int M) {
  int n = (int)std::lround(target * M);
  return {n, (double)n / M};
}

}  // namespace fvca
