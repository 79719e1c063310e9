#pragma once

#include "models.hpp"
#include "operators.hpp"

namespace fvca {

// Assemble the covariant Hamiltonian: for every cell x and stored hop y,
//   <x+y| H |x> += e^{i theta(y, x+y)} w_y(omega around x),
// plus the conjugate transpose; the on-site block is symmetrized.  theta is
// the Peierls phase of the quantized-flux gauge (see FluxMatrix).
inline FiniteOperator build_hamiltonian(const HoppingModel& model, const TorusGeometry& geo,
                                        const FluxMatrix& flux, const DisorderConfig& config) {
  if (model.d != geo.d || model.N != geo.N)
    throw ConfigError("model and geometry disagree on dimension or fiber");
  int minM = *std::min_element(geo.sizes.begin(), geo.sizes.end());
  // 2*range == M aliases +y with -y but still sums to the correct Bloch
  // phases (e.g. M = 2 nearest-neighbor doubles the bond to 2 cos k);
  // only 2*range > M makes the wrapped displacement ambiguous
  if (2 * model.range() > minM)
    throw RangeTooLarge("hopping range exceeds min(M)/2: wrapped displacement ambiguous");
  flux.check_quantized(geo);
  for (const auto& h : model.hops)
    if (!detail::lex_nonneg(h.y)) throw ConfigError("stored hops must satisfy y >= 0 lexicographically");
  if (config.cells != geo.cells() || config.channels != model.channels)
    throw ConfigError("disorder config shape mismatch");

  FiniteOperator H = FiniteOperator::zero(geo);
  const int N = geo.N;
  LocalView local{&config, &geo, std::vector<int>(geo.d, 0)};
  std::vector<int> row(geo.d);
  for (long c = 0; c < geo.cells(); ++c) {
    local.anchor = geo.cell_coords(c);
    for (const auto& h : model.hops) {
      Mat w = h.w(local);
      bool onsite = std::all_of(h.y.begin(), h.y.end(), [](int v) { return v == 0; });
      if (onsite) {
        H.A.block(c * N, c * N, N, N) += 0.5 * (w + w.adjoint());
        continue;
      }
      for (int j = 0; j < geo.d; ++j)
        row[j] = (int)(((long)local.anchor[j] + h.y[j]) % geo.sizes[j] + geo.sizes[j]) % geo.sizes[j];
      long r = geo.cell_index(row);
      cplx ph = std::exp(I1 * flux.hop_phase(h.y, row));
      H.A.block(r * N, c * N, N, N) += ph * w;
      H.A.block(c * N, r * N, N, N) += std::conj(ph) * w.adjoint();
    }
  }
  H.hermitian = true;
  return H;
}

inline FiniteOperator build_hamiltonian(const HoppingModel& model, const TorusGeometry& geo,
                                        const FluxMatrix& flux) {
  return build_hamiltonian(model, geo, flux, DisorderConfig::zero(geo.cells(), model.channels));
}

}  // namespace fvca
