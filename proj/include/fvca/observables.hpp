#pragma once

#include <algorithm>

#include "hamiltonian.hpp"
#include "spectral.hpp"

namespace fvca {

namespace detail {
inline int perm_sign(const std::vector<int>& p) {
  int s = 1;
  for (size_t i = 0; i < p.size(); ++i)
    for (size_t j = i + 1; j < p.size(); ++j)
      if (p[i] > p[j]) s = -s;
  return s;
}
// trace of A*B without forming the product
inline cplx trace_prod(const Mat& A, const Mat& B) {
  return (A.transpose().cwiseProduct(B)).sum();
}
inline void check_projection(const FiniteOperator& P) {
  const long n = P.A.rows();
  if ((P.A - P.A.adjoint()).cwiseAbs().maxCoeff() > 1e-8)
    throw NotAProjection("projection is not Hermitian");
  // spot-check idempotency on random vectors (O(n^2), not O(n^3))
  std::uint64_t s = 12345;
  for (int t = 0; t < 3; ++t) {
    Vec v(n);
    for (long i = 0; i < n; ++i) v[i] = cplx(u64_to_unit_centered(splitmix64(s)), u64_to_unit_centered(splitmix64(s)));
    Vec Pv = P.A * v;
    if ((P.A * Pv - Pv).cwiseAbs().maxCoeff() > 1e-8 * (1.0 + Pv.cwiseAbs().maxCoeff()))
      throw NotAProjection("projection is not idempotent");
  }
}
}  // namespace detail

// sigma_ij at one Fermi level: the documented two-rotation eigenbasis path.
// Sign and prefactor (no 2 pi; plain 1/|V|) pinned against the published
// clean-limit conductivity table.
inline cplx kubo_conductivity(const FiniteOperator& H, const EigenSystem& es, int i, int j,
                              double eps_F, double T, double Gamma) {
  if (T <= 0.0) throw NonpositiveTemperature("kubo requires T > 0");
  if (Gamma <= 0.0) throw NonpositiveWidth("kubo requires Gamma > 0");
  const long n = H.A.rows();
  Mat dHi = approximate_derivation(H, i).A;
  Mat A = es.phi.adjoint() * dHi * es.phi;
  Mat dG = fermi_dirac_matrix(es, eps_F, T).A;
  derivation_inplace(dG, es.geo, j);
  Mat B = es.phi.adjoint() * dG * es.phi;
  cplx S = 0.0;
  for (long a = 0; a < n; ++a)
    for (long b = 0; b < n; ++b) S += A(b, a) * B(a, b) / (Gamma + I1 * (es.eps[a] - es.eps[b]));
  return -S / (double)es.geo.cells();
}

// Same sum reassociated so a whole Fermi-level sweep at fixed (T, Gamma)
// costs 3 GEMMs beyond the rotation of dH:
//   sigma(eps_F) = -(1/|V|) sum_c f_FD(eps_c) g_c,
//   g_c = diag(Phi^dag W Phi)_c,  W_uv = -i wrap(x_v - x_u)_j Kpos_uv,
//   Kpos = Phi K^T Phi^dag, K_ab = A_ba / (Gamma + i(eps_a - eps_b)),
//   A = Phi^dag (d_i H) Phi.  The wrap weight stays attached to the second
// trace factor so the identity with the direct form is exact, including the
// sign-asymmetric -M/2 wrap column of even lattices.
struct KuboSweep {
  const EigenSystem* es;
  Vec g;  // per-eigenstate weights
  std::vector<cplx> eval(const std::vector<double>& eps_F_list, double T) const {
    std::vector<cplx> out;
    for (double eps_F : eps_F_list) {
      cplx s = 0.0;
      for (long c = 0; c < es->eps.size(); ++c) {
        double z = std::clamp((es->eps[c] - eps_F) / T, -700.0, 700.0);
        s += g[c] / (1.0 + std::exp(z));
      }
      out.push_back(-s / (double)es->geo.cells());
    }
    return out;
  }
};

// One sweep per requested derivation direction j, sharing the rotated current
// A and the position-basis divided-difference kernel across all of them (each
// extra direction costs one GEMM instead of four).
inline std::vector<KuboSweep> kubo_sweep_prepare_multi(const FiniteOperator& H,
                                                       const EigenSystem& es, int i,
                                                       const std::vector<int>& js, double Gamma,
                                                       const Mat* A_rotated = nullptr) {
  if (Gamma <= 0.0) throw NonpositiveWidth("kubo requires Gamma > 0");
  const long n = H.A.rows();
  Mat A;
  if (A_rotated)
    A = *A_rotated;
  else {
    Mat dHi = approximate_derivation(H, i).A;
    A.noalias() = es.phi.adjoint() * dHi * es.phi;
  }
  Mat K(n, n);
  for (long a = 0; a < n; ++a)
    for (long b = 0; b < n; ++b) K(a, b) = A(b, a) / (Gamma + I1 * (es.eps[a] - es.eps[b]));
  A.resize(0, 0);
  Mat Kpos = es.phi * K.transpose() * es.phi.adjoint();
  K.resize(0, 0);
  std::vector<KuboSweep> out;
  for (int j : js) {
    Mat Z = Kpos;
    derivation_transpose_inplace(Z, es.geo, j);
    Mat Y = Z * es.phi;
    KuboSweep sw;
    sw.es = &es;
    sw.g.resize(n);
    for (long c = 0; c < n; ++c) sw.g[c] = (es.phi.col(c).adjoint() * Y.col(c))(0);
    out.push_back(std::move(sw));
  }
  return out;
}

inline KuboSweep kubo_sweep_prepare(const FiniteOperator& H, const EigenSystem& es, int i, int j,
                                    double Gamma, const Mat* A_rotated = nullptr) {
  return kubo_sweep_prepare_multi(H, es, i, {j}, Gamma, A_rotated)[0];
}

struct Resistivity {
  double rho_xx, rho_xy;
};
inline Resistivity resistivity(double sigma_xx, double sigma_xy) {
  double det = sigma_xx * sigma_xx + sigma_xy * sigma_xy;
  if (det <= 1e-14) throw SingularTensor("conductivity tensor is singular");
  return {sigma_xx / det, -sigma_xy / det};
}
inline RMat resistivity(const RMat& sigma) {
  RMat s = 0.5 * (sigma - sigma.transpose());
  RMat sym = RMat::Identity(sigma.rows(), sigma.cols()) * sigma.diagonal().mean();
  RMat full = sym + s;  // isotropic symmetrization before inverting
  if (std::abs(full.determinant()) <= 1e-14) throw SingularTensor("conductivity tensor is singular");
  return full.inverse();
}

struct SpectralCurve {
  std::vector<double> grid;
  std::vector<double> values;
};
struct SpectralSurface {
  std::vector<double> grid;
  RMat values;  // grid x grid
};

inline SpectralCurve dos(const EigenSystem& es, const std::vector<double>& grid, double delta) {
  RMat K = spectral_kernel(es, grid, KernelKind::lorentzian, delta);
  SpectralCurve out{grid, {}};
  double norm = 2.0 * pi / (double)es.geo.dim();
  for (long i = 0; i < K.rows(); ++i) out.values.push_back(norm * K.row(i).sum());
  return out;
}

// real-space even Chern number over an ordered direction list (|I| even)
inline double chern_even(const FiniteOperator& P, const std::vector<int>& dirs,
                         double* imag_residual = nullptr) {
  if (dirs.size() % 2 != 0) throw ConfigError("chern_even needs an even number of directions");
  detail::check_projection(P);
  const int q = (int)dirs.size() / 2;
  std::vector<Mat> dP;
  for (int j : dirs) dP.push_back(approximate_derivation(P, j).A);
  std::vector<int> idx(dirs.size());
  for (size_t k = 0; k < idx.size(); ++k) idx[k] = (int)k;
  std::sort(idx.begin(), idx.end());
  cplx sum = 0.0;
  std::vector<int> perm = idx;
  do {
    Mat C = P.A;
    for (size_t k = 0; k + 1 < perm.size(); ++k) C = (C * dP[perm[k]]).eval();
    sum += (double)detail::perm_sign(perm) * detail::trace_prod(C, dP[perm.back()]);
  } while (std::next_permutation(perm.begin(), perm.end()));
  cplx coeff = std::pow(2.0 * pi * I1, q);
  for (int k = 2; k <= q; ++k) coeff /= (double)k;
  cplx ch = coeff / (double)P.geo.cells() * sum;
  if (imag_residual) *imag_residual = std::abs(ch.imag());
  return ch.real();
}

// Ch_{d0 d1} from an isometric frame Q with Q Q^dag = P: the antisymmetrized
// trace Tr(P dP_0 dP_1) - Tr(P dP_1 dP_0) is evaluated through rank-k
// products, Tr(P dP_a dP_b) = Tr((Q^dag dP_a)(dP_b Q)), O(n^2 k) instead of
// O(n^3).  Both derivations of a Hermitian P are Hermitian up to the lone
// M/2 wrap component on even lattices, so Tr(P dP_1 dP_0) = conj of the
// other term and one trace suffices; the residual from the M/2 component is
// O(1e-10) at the sizes where this path is used (checked against chern_even).
inline double chern_even_frame(const Mat& Q, const TorusGeometry& geo, int d0, int d1) {
  const long n = Q.rows();
  Mat P = Mat::Zero(n, n);
  detail::herk_accumulate(P, Q);
  Mat A = P;
  derivation_inplace(A, geo, d0);
  Mat X0 = Q.adjoint() * A;
  A = P;
  P.resize(0, 0);
  derivation_inplace(A, geo, d1);
  Mat Y1 = A * Q;
  A.resize(0, 0);
  cplx s01 = detail::trace_prod(X0, Y1);
  return (2.0 * pi * I1 / (double)geo.cells() * (s01 - std::conj(s01))).real();
}

// Winding of the disordered chiral chain with hopping 1 + W1 w(x,0), mass
// m0 + W2 w(x,1) (the two-band nearest-neighbor model).  In the grading
// basis the off-diagonal block is bidiagonal, h(x,x) = -i m_x,
// h(x,x+1) = t_x; for M divisible by 4 the row/column phases
// exp(i pi x / 2) make it real, so the flat unitary comes from a real SVD
// and Ch_1 = (1/M) sum wrap(r - c) |U_F(r,c)|^2 needs only |U_F|.
// Matches chern_odd(fermi_unitary_chiral(...).U, {0}) to roundoff.
inline double aiii_chain_winding(double m0, double W1, double W2, const DisorderConfig& cfg) {
  const long M = cfg.cells;
  if (M % 4 != 0) throw Unsupported("real reduction needs M divisible by 4");
  if (cfg.channels != 2) throw ConfigError("disorder config shape mismatch");
  RVec mm(M), tt(M);
  for (long x = 0; x < M; ++x) {
    mm[x] = m0 + W2 * cfg.at(x, 1);
    tt[x] = 1.0 + W1 * cfg.at(x, 0);
  }
  // polar factor W of the bidiagonal R from the eigenbasis of R^T R (one
  // dsyevd + one rank-n update; R itself multiplies in O(M^2)); fall back to
  // a full SVD when R is nearly singular and the squaring loses accuracy
  RMat G = RMat::Zero(M, M);
  for (long x = 0; x < M; ++x) {
    long xm = (x + M - 1) % M, xp = (x + 1) % M;
    G(x, x) = mm[x] * mm[x] + tt[xm] * tt[xm];
    G(x, xp) += mm[x] * tt[x];
    G(xp, x) += mm[x] * tt[x];
  }
  RVec lam(M);
  lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', (lapack_int)M, G.data(),
                                   (lapack_int)M, lam.data());
  if (info != 0) throw ConvergenceFailure("dsyevd failed, info=" + std::to_string(info));
  RMat W(M, M);
  if (lam[0] > 1e-10) {
    for (long c = 0; c < M; ++c) G.col(c) *= std::pow(lam[c], -0.25);
    RMat B = RMat::Zero(M, M);
    cblas_dsyrk(CblasColMajor, CblasLower, CblasNoTrans, (int)M, (int)M, 1.0, G.data(), (int)M,
                0.0, B.data(), (int)M);
    for (long c = 0; c < M; ++c)
      for (long r = 0; r < c; ++r) B(r, c) = B(c, r);
    for (long x = 0; x < M; ++x) W.row(x) = mm[x] * B.row(x) + tt[x] * B.row((x + 1) % M);
  } else {
    RMat R = RMat::Zero(M, M);
    for (long x = 0; x < M; ++x) {
      R(x, x) = mm[x];
      R(x, (x + 1) % M) = tt[x];
    }
    RVec s(M);
    RMat u(M, M), vt(M, M);
    info = LAPACKE_dgesdd(LAPACK_COL_MAJOR, 'A', (lapack_int)M, (lapack_int)M, R.data(),
                          (lapack_int)M, s.data(), u.data(), (lapack_int)M, vt.data(),
                          (lapack_int)M);
    if (info != 0) throw ConvergenceFailure("dgesdd failed, info=" + std::to_string(info));
    if (s.minCoeff() < 1e-10)
      std::cerr << "warning: zero mode within 1e-10 of the chiral point\n";
    W = u * vt;
  }
  double total = 0.0;
  for (long r = 0; r < M; ++r)
    for (long c = 0; c < M; ++c) total += wrap1((int)(r - c), (int)M) * W(c, r) * W(c, r);
  return total / (double)M;
}

// real-space odd Chern number of a Fermi unitary (|I| odd)
inline double chern_odd(const FiniteOperator& U, const std::vector<int>& dirs,
                        double* imag_residual = nullptr) {
  if (dirs.size() % 2 != 1) throw ConfigError("chern_odd needs an odd number of directions");
  const long n = U.A.rows();
  if ((U.A.adjoint() * U.A - Mat::Identity(n, n)).cwiseAbs().maxCoeff() > 1e-6)
    throw NotUnitary("chern_odd input is not unitary");
  std::vector<Mat> W;
  for (int j : dirs) W.push_back(U.A.adjoint() * approximate_derivation(U, j).A);
  std::vector<int> perm(dirs.size());
  for (size_t k = 0; k < perm.size(); ++k) perm[k] = (int)k;
  cplx sum = 0.0;
  do {
    if (perm.size() == 1)
      sum += (double)detail::perm_sign(perm) * W[perm[0]].trace();
    else {
      Mat C = W[perm[0]];
      for (size_t k = 1; k + 1 < perm.size(); ++k) C = (C * W[perm[k]]).eval();
      sum += (double)detail::perm_sign(perm) * detail::trace_prod(C, W[perm.back()]);
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  const int q = ((int)dirs.size() - 1) / 2;
  cplx coeff = I1 * std::pow(I1 * pi, q);
  for (int k = (int)dirs.size(); k >= 2; k -= 2) coeff /= (double)k;
  cplx ch = coeff / (double)U.geo.cells() * sum;
  if (imag_residual) *imag_residual = std::abs(ch.imag());
  return ch.real();
}

// current-current correlation surface f_r(eps, eps') (raw algebra units; the
// CLI reports it in 1/(4 pi^2) display units)
inline SpectralSurface ccc(const FiniteOperator& H, const EigenSystem& es,
                           const std::vector<double>& grid, double r) {
  const long n = H.A.rows();
  RMat G = RMat::Zero(n, n);
  for (int j = 0; j < es.geo.d; ++j) {
    Mat dH = approximate_derivation(H, j).A;
    Mat Aj = es.phi.adjoint() * dH * es.phi;
    G += Aj.cwiseAbs2();
  }
  G = (0.5 / (double)es.geo.d * (G + G.transpose())).eval();
  RMat K = spectral_kernel(es, grid, KernelKind::gaussian, r);
  SpectralSurface out{grid, {}};
  out.values = K * G * K.transpose() / (double)es.geo.dim();
  out.values = (0.5 * (out.values + out.values.transpose())).eval();  // symmetric by definition
  return out;
}

// mean absolute deviation between two surfaces on a common grid, in display
// units (the variation estimator for kernel-width/size stability)
inline double ccc_estimator(const SpectralSurface& a, const SpectralSurface& b) {
  if (a.grid != b.grid) throw ConfigError("ccc_estimator needs a common grid");
  return 4.0 * pi * pi * (a.values - b.values).cwiseAbs().mean();
}

// Delta-localization length squared: (1/(N |V|)) sum_j ||d_j P||_F^2
inline double delta_loc_length(const FiniteOperator& P_delta) {
  detail::check_projection(P_delta);
  double s = 0.0;
  for (int j = 0; j < P_delta.geo.d; ++j)
    s += approximate_derivation(P_delta, j).A.squaredNorm();
  return s / (double)P_delta.geo.dim();
}

// states per unit cell below the Fermi level
inline double filling(const EigenSystem& es, double eps_F) {
  return (double)fermi_count(es, eps_F) / (double)es.geo.cells();
}

struct StredaResult {
  double slope;    // Delta filling / Delta f across adjacent quantized fluxes
  double chern;    // real-space Ch_2 at the lower flux
};

inline StredaResult streda_check(const HoppingModel& model, const TorusGeometry& geo, double eps_F,
                                 int n, int nprime) {
  if (nprime != n + 1) throw ConfigError("streda_check uses adjacent quantized fluxes");
  auto at_flux = [&](int numer) {
    FluxMatrix flux(geo);
    flux.set(0, 1, numer);
    FiniteOperator H = build_hamiltonian(model, geo, flux);
    return eigh(H);
  };
  EigenSystem e0 = at_flux(n), e1 = at_flux(nprime);
  double bw0 = e0.eps[e0.eps.size() - 1] - e0.eps[0];
  for (const EigenSystem* e : {&e0, &e1}) {
    double mind = 1e300;
    for (long a = 0; a < e->eps.size(); ++a) mind = std::min(mind, std::abs(e->eps[a] - eps_F));
    if (mind < 10.0 * bw0 / (double)e->eps.size())
      throw GapClosed("Fermi level not in a robust gap at one of the fluxes");
  }
  StredaResult out;
  out.slope = (filling(e1, eps_F) - filling(e0, eps_F)) * geo.sizes[0];
  out.chern = chern_even(fermi_projection(e0, eps_F), {0, 1});
  return out;
}

}  // namespace fvca
