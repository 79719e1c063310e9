#pragma once

#include <iostream>

#include "models.hpp"
#include "operators.hpp"

#ifndef lapack_complex_double
#define lapack_complex_double std::complex<double>
#define lapack_complex_float std::complex<float>
#endif
#include <cblas.h>
#include <lapacke.h>

namespace fvca {

namespace detail {
// P += Q Q^dag through a Hermitian rank-k update (half the GEMM flops)
inline void herk_accumulate(Mat& P, const Mat& Q) {
  const long n = Q.rows(), k = Q.cols();
  cblas_zherk(CblasColMajor, CblasLower, CblasNoTrans, (int)n, (int)k, 1.0, Q.data(), (int)n, 0.0,
              P.data(), (int)n);
  for (long c = 0; c < n; ++c) {
    P(c, c) = P(c, c).real();
    for (long r = c + 1; r < n; ++r) P(c, r) = std::conj(P(r, c));
  }
}
}  // namespace detail

struct EigenSystem {
  TorusGeometry geo;
  RVec eps;  // ascending
  Mat phi;   // columns are eigenvectors
};

// full Hermitian eigendecomposition (LAPACK zheevd, deterministic backend)
inline EigenSystem eigh(const FiniteOperator& H) {
  const long n = H.A.rows();
  double scale = std::max(1.0, H.A.cwiseAbs().maxCoeff());
  if ((H.A - H.A.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw NotHermitian("eigh input is not Hermitian");
  EigenSystem es;
  es.geo = H.geo;
  es.phi = 0.5 * (H.A + H.A.adjoint());  // symmetrize roundoff before factorizing
  es.eps.resize(n);
  lapack_int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'L', (lapack_int)n, es.phi.data(),
                                   (lapack_int)n, es.eps.data());
  if (info != 0) throw ConvergenceFailure("zheevd failed, info=" + std::to_string(info));
  return es;
}

// eigenpairs with eigenvalue in (lo, hi] only (LAPACK zheevr); phi has one
// column per selected pair, so downstream frame-based code scales with the
// occupied count instead of the full dimension
inline EigenSystem eigh_range(const FiniteOperator& H, double lo, double hi) {
  const long n = H.A.rows();
  double scale = std::max(1.0, H.A.cwiseAbs().maxCoeff());
  if ((H.A - H.A.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw NotHermitian("eigh input is not Hermitian");
  Mat A = 0.5 * (H.A + H.A.adjoint());
  RVec w(n);
  Mat Z(n, n);
  std::vector<lapack_int> isuppz(2 * (size_t)n);
  lapack_int m = 0;
  lapack_int info =
      LAPACKE_zheevr(LAPACK_COL_MAJOR, 'V', 'V', 'L', (lapack_int)n, A.data(), (lapack_int)n, lo,
                     hi, 1, 1, 0.0, &m, w.data(), Z.data(), (lapack_int)n, isuppz.data());
  if (info != 0) throw ConvergenceFailure("zheevr failed, info=" + std::to_string(info));
  EigenSystem es;
  es.geo = H.geo;
  es.eps = w.head(m);
  es.phi = Z.leftCols(m);
  return es;
}

// P = sum_{eps_a <= eps_F} |phi_a><phi_a| (closed interval at the Fermi level)
inline long fermi_count(const EigenSystem& es, double eps_F) {
  long k = 0;
  bool warned = false;
  for (long a = 0; a < es.eps.size(); ++a) {
    if (es.eps[a] <= eps_F) ++k;
    if (!warned && std::abs(es.eps[a] - eps_F) < 1e-12) {
      std::cerr << "warning: Fermi level within 1e-12 of an eigenvalue\n";
      warned = true;
    }
  }
  return k;
}

inline FiniteOperator fermi_projection(const EigenSystem& es, double eps_F) {
  long k = fermi_count(es, eps_F);
  FiniteOperator P{es.geo, Mat(), true};
  P.A = Mat::Zero(es.phi.rows(), es.phi.rows());
  if (k > 0) detail::herk_accumulate(P.A, es.phi.leftCols(k));
  return P;
}

// spectral projection onto an energy interval
inline FiniteOperator interval_projection(const EigenSystem& es, double lo, double hi) {
  std::vector<long> idx;
  for (long a = 0; a < es.eps.size(); ++a)
    if (es.eps[a] >= lo && es.eps[a] <= hi) idx.push_back(a);
  Mat Q(es.phi.rows(), (long)idx.size());
  for (size_t c = 0; c < idx.size(); ++c) Q.col((long)c) = es.phi.col(idx[c]);
  FiniteOperator P{es.geo, Mat::Zero(es.phi.rows(), es.phi.rows()), true};
  if (!idx.empty()) detail::herk_accumulate(P.A, Q);
  return P;
}

inline FiniteOperator fermi_dirac_matrix(const EigenSystem& es, double eps_F, double T) {
  if (T <= 0.0) throw NonpositiveTemperature("fermi_dirac_matrix requires T > 0");
  RVec f(es.eps.size());
  for (long a = 0; a < es.eps.size(); ++a) {
    double z = std::clamp((es.eps[a] - eps_F) / T, -700.0, 700.0);
    f[a] = 1.0 / (1.0 + std::exp(z));
  }
  FiniteOperator out{es.geo, Mat(), true};
  out.A.noalias() = es.phi * f.asDiagonal() * es.phi.adjoint();
  return out;
}

struct FermiUnitary {
  FiniteOperator U;       // on the half-dimensional grading eigenspace
  double unitarity_defect = 0.0;
};

// U_F = lower-left block of 1 - 2P in the basis where J = diag(1, -1)
inline FermiUnitary fermi_unitary(const FiniteOperator& P, const Mat& J) {
  const TorusGeometry& g = P.geo;
  const int N = g.N;
  if (N % 2 != 0) throw ConfigError("chiral grading needs even fiber dimension");
  Mat V = detail::grading_basis(J);
  const long cells = g.cells(), half = N / 2;
  // Q = V^dag (1-2P) V site-wise; extract the (-,+) block
  Mat Q = Mat::Identity(g.dim(), g.dim()) - 2.0 * P.A;
  Mat W(g.dim(), g.dim());
  for (long cc = 0; cc < cells; ++cc)
    for (long cr = 0; cr < cells; ++cr)
      W.block(cr * N, cc * N, N, N) = V.adjoint() * Q.block(cr * N, cc * N, N, N) * V;
  Mat U(cells * half, cells * half), diagblk(cells * half, cells * half);
  for (long cc = 0; cc < cells; ++cc)
    for (long cr = 0; cr < cells; ++cr) {
      U.block(cr * half, cc * half, half, half) = W.block(cr * N + half, cc * N, half, half);
      diagblk.block(cr * half, cc * half, half, half) = W.block(cr * N, cc * N, half, half);
    }
  if (diagblk.cwiseAbs().maxCoeff() > 1e-6)
    throw ChiralityViolation("diagonal grading block of 1-2P is not small");
  FermiUnitary out;
  out.U = FiniteOperator{TorusGeometry(g.sizes, (int)half), std::move(U), false};
  out.unitarity_defect =
      (out.U.A.adjoint() * out.U.A - Mat::Identity(cells * half, cells * half)).cwiseAbs().maxCoeff();
  return out;
}

// convenience: warn on near-zero modes, project at eps_F = 0, extract U_F
inline FermiUnitary fermi_unitary_at_zero(const EigenSystem& es, const Mat& J) {
  for (long a = 0; a < es.eps.size(); ++a)
    if (std::abs(es.eps[a]) < 1e-10) {
      std::cerr << "warning: zero mode within 1e-10 of the chiral point\n";
      break;
    }
  return fermi_unitary(fermi_projection(es, 0.0), J);
}

// fast equivalent for exactly chiral H at eps_F = 0: with site-wise basis
// J = diag(1,-1), H = [[0, h],[h^dag, 0]] and 1-2P = sgn(H) = [[0, (UV)^dag],
// [UV, 0]] where h = U S V^dag is the SVD; returns the same U_F as
// fermi_unitary(fermi_projection(eigh(H), 0), J)
inline FermiUnitary fermi_unitary_chiral(const FiniteOperator& H, const Mat& J) {
  const TorusGeometry& g = H.geo;
  const int N = g.N;
  Mat V = detail::grading_basis(J);
  const long cells = g.cells(), half = N / 2;
  Mat h(cells * half, cells * half);  // (+,-) block of V^dag H V
  for (long cc = 0; cc < cells; ++cc)
    for (long cr = 0; cr < cells; ++cr) {
      Mat blk = V.adjoint() * H.A.block(cr * N, cc * N, N, N) * V;
      h.block(cr * half, cc * half, half, half) = blk.block(0, half, half, half);
      if (blk.block(0, 0, half, half).cwiseAbs().maxCoeff() > 1e-10 ||
          blk.block(half, half, half, half).cwiseAbs().maxCoeff() > 1e-10)
        throw ChiralityViolation("Hamiltonian is not exactly chiral");
    }
  const long hn = cells * half;
  RVec sv(hn);
  Mat su(hn, hn), svt(hn, hn);
  Mat hc = h;  // zgesdd destroys its input; keep a copy for the QR fallback
  lapack_int info = LAPACKE_zgesdd(LAPACK_COL_MAJOR, 'A', (lapack_int)hn, (lapack_int)hn, h.data(),
                                   (lapack_int)hn, sv.data(), su.data(), (lapack_int)hn,
                                   svt.data(), (lapack_int)hn);
  if (info != 0) {
    // divide-and-conquer occasionally fails to converge on large blocks;
    // the QR-based driver is slower but does not share the failure mode
    RVec superb(hn - 1);
    info = LAPACKE_zgesvd(LAPACK_COL_MAJOR, 'A', 'A', (lapack_int)hn, (lapack_int)hn, hc.data(),
                          (lapack_int)hn, sv.data(), su.data(), (lapack_int)hn, svt.data(),
                          (lapack_int)hn, superb.data());
    if (info != 0) throw ConvergenceFailure("zgesvd failed, info=" + std::to_string(info));
  }
  hc.resize(0, 0);
  if (sv.minCoeff() < 1e-10)
    std::cerr << "warning: zero mode within 1e-10 of the chiral point\n";
  FermiUnitary out;
  // 1-2P flips the sign of the negative-energy half: sgn([[0,h],[h^dag,0]]) =
  // [[0, W],[W^dag, 0]] with W = U V^dag from h = U S V^dag, so the
  // lower-left block is W^dag = V U^dag = (U V^dag)^dag.
  Mat Uf = (su * svt).adjoint();
  out.U = FiniteOperator{TorusGeometry(g.sizes, (int)half), std::move(Uf), false};
  out.unitarity_defect = (out.U.A.adjoint() * out.U.A -
                          Mat::Identity(cells * half, cells * half)).cwiseAbs().maxCoeff();
  return out;
}

enum class KernelKind { gaussian, lorentzian };

// per-grid-point diagonal spectral weights; rows = grid, cols = eigenvalues
inline RMat spectral_kernel(const EigenSystem& es, const std::vector<double>& grid, KernelKind kind,
                            double width) {
  if (width <= 0.0) throw NonpositiveWidth("kernel width must be positive");
  RMat out((long)grid.size(), es.eps.size());
  for (long i = 0; i < (long)grid.size(); ++i)
    for (long a = 0; a < es.eps.size(); ++a) {
      double t = es.eps[a] - grid[i];
      out(i, a) = kind == KernelKind::gaussian
                      ? std::exp(-t * t / (2.0 * width * width)) / (width * std::sqrt(2.0 * pi))
                      : width / (t * t + width * width);
    }
  return out;
}

}  // namespace fvca
