#pragma once

#include <cstdio>
#include <cstring>

#include "disorder.hpp"
#include "flux.hpp"
#include "torus.hpp"

namespace fvca {

// Dense operator on C^N (x) l^2(torus cells).
struct FiniteOperator {
  TorusGeometry geo;
  Mat A;
  bool hermitian = false;

  FiniteOperator() = default;
  FiniteOperator(TorusGeometry g, Mat m, bool herm = false)
      : geo(std::move(g)), A(std::move(m)), hermitian(herm) {}

  static FiniteOperator zero(const TorusGeometry& g) {
    return {g, Mat::Zero(g.dim(), g.dim()), true};
  }
  static FiniteOperator identity(const TorusGeometry& g) {
    return {g, Mat::Identity(g.dim(), g.dim()), true};
  }
};

namespace detail {
// per-cell j-th coordinate, indexed by cell
inline std::vector<int> coord_axis(const TorusGeometry& g, int j) {
  std::vector<int> xs(g.cells());
  for (long c = 0; c < g.cells(); ++c) xs[c] = g.cell_coords(c)[j];
  return xs;
}
}  // namespace detail

// (d_j A)_{(a,x),(b,x')} = -i * wrap(x - x')_j * A_{(a,x),(b,x')}
inline FiniteOperator approximate_derivation(const FiniteOperator& op, int j) {
  const TorusGeometry& g = op.geo;
  const int M = g.sizes[j];
  std::vector<int> xs = detail::coord_axis(g, j);
  // wrapped displacement lookup over delta in (-M, M)
  std::vector<double> wtab(2 * M);
  for (int delta = -M + 1; delta < M; ++delta) wtab[delta + M] = wrap1(delta, M);

  FiniteOperator out{g, Mat(g.dim(), g.dim()), false};
  const int N = g.N;
  const long n = g.dim();
  for (long col = 0; col < n; ++col) {
    const int xc = xs[col / N];
    const cplx* src = op.A.col(col).data();
    cplx* dst = out.A.col(col).data();
    for (long row = 0; row < n; ++row)
      dst[row] = cplx(0.0, -wtab[xs[row / N] - xc + M]) * src[row];
  }
  return out;
}

// in-place variant used by hot paths; same arithmetic
inline void derivation_inplace(Mat& A, const TorusGeometry& g, int j) {
  const int M = g.sizes[j];
  std::vector<int> xs = detail::coord_axis(g, j);
  std::vector<double> wtab(2 * M);
  for (int delta = -M + 1; delta < M; ++delta) wtab[delta + M] = wrap1(delta, M);
  const int N = g.N;
  const long n = A.rows();
  for (long col = 0; col < n; ++col) {
    const int xc = xs[col / N];
    cplx* dst = A.col(col).data();
    for (long row = 0; row < n; ++row) dst[row] *= cplx(0.0, -wtab[xs[row / N] - xc + M]);
  }
}

// transposed-weight variant: entry (r,c) picks up -i*wrap(x_c - x_r). On odd
// tori this is exactly -derivation, but the -M/2 wrap column of even tori is
// not sign-symmetric, and reassociated traces need the weights placed on the
// second factor verbatim.
inline void derivation_transpose_inplace(Mat& A, const TorusGeometry& g, int j) {
  const int M = g.sizes[j];
  std::vector<int> xs = detail::coord_axis(g, j);
  std::vector<double> wtab(2 * M);
  for (int delta = -M + 1; delta < M; ++delta) wtab[delta + M] = wrap1(delta, M);
  const int N = g.N;
  const long n = A.rows();
  for (long col = 0; col < n; ++col) {
    const int xc = xs[col / N];
    cplx* dst = A.col(col).data();
    for (long row = 0; row < n; ++row) dst[row] *= cplx(0.0, -wtab[xc - xs[row / N] + M]);
  }
}

// Algebraic form of the same derivation for odd M = 2L+1: a sum of diagonal
// conjugations sum_{lambda^M = 1, lambda != 1} c_lambda lambda^{-X_j} A
// lambda^{X_j} with c_lambda = -lambda^{L+1} / (1 - lambda), times -i.
inline FiniteOperator derivation_root_of_unity(const FiniteOperator& op, int j) {
  const TorusGeometry& g = op.geo;
  const int M = g.sizes[j];
  if (M % 2 == 0) throw Unsupported("root-of-unity derivation needs odd M");
  const int L = M / 2;
  std::vector<int> xs = detail::coord_axis(g, j);
  FiniteOperator out{g, Mat::Zero(g.dim(), g.dim()), false};
  const int N = g.N;
  const long n = g.dim();
  for (int s = 1; s < M; ++s) {
    cplx lam = std::exp(I1 * (2.0 * pi * s / M));
    cplx c = -std::pow(lam, L + 1) / (1.0 - lam);
    for (long col = 0; col < n; ++col) {
      cplx colph = std::pow(lam, xs[col / N]);
      for (long row = 0; row < n; ++row)
        out.A(row, col) += c * colph * std::pow(lam, -xs[row / N]) * op.A(row, col);
    }
  }
  out.A *= -I1;
  return out;
}

// trace normalized over fiber and volume: T(1) = 1
inline cplx normalized_trace(const FiniteOperator& op) {
  return op.A.trace() / (double)op.geo.dim();
}

// Magnetic shift by y: U_y |x> = e^{i(B(y,x) + B(y,y)/2)} |x+y>, identity on
// the fiber. U_{e_j} are the dual magnetic translations generating the hops.
inline FiniteOperator magnetic_shift(const TorusGeometry& g, const FluxMatrix& flux,
                                     const std::vector<int>& y) {
  flux.check_quantized(g);
  FiniteOperator out{g, Mat::Zero(g.dim(), g.dim()), false};
  const double c0 = 0.5 * flux.gauge_form(y, y);
  for (long c = 0; c < g.cells(); ++c) {
    std::vector<int> x = g.cell_coords(c);
    double ph = flux.gauge_form(y, x) + c0;
    std::vector<int> xr(g.d);
    for (int j = 0; j < g.d; ++j) xr[j] = (int)(((long)x[j] + y[j]) % g.sizes[j] + g.sizes[j]) % g.sizes[j];
    long r = g.cell_index(xr);
    cplx val = std::exp(I1 * ph);
    for (int a = 0; a < g.N; ++a) out.A(g.site(r, a), g.site(c, a)) = val;
  }
  return out;
}

// Translation V_y |x> = e^{i B(x,y)} |x+y>; commutes with every magnetic
// shift U_{e_j}, so conjugation by V_y implements the disorder shift tau_y.
inline FiniteOperator apply_magnetic_translation(const FiniteOperator& op, const std::vector<int>& y,
                                                 const FluxMatrix& flux) {
  const TorusGeometry& g = op.geo;
  flux.check_quantized(g);
  const long nc = g.cells();
  std::vector<long> dest(nc);
  std::vector<cplx> phase(nc);
  for (long c = 0; c < nc; ++c) {
    std::vector<int> x = g.cell_coords(c);
    phase[c] = std::exp(I1 * flux.gauge_form(x, y));
    std::vector<int> xr(g.d);
    for (int j = 0; j < g.d; ++j) xr[j] = (int)(((long)x[j] + y[j]) % g.sizes[j] + g.sizes[j]) % g.sizes[j];
    dest[c] = g.cell_index(xr);
  }
  FiniteOperator out{g, Mat(g.dim(), g.dim()), op.hermitian};
  const int N = g.N;
  for (long cc = 0; cc < nc; ++cc)
    for (long cr = 0; cr < nc; ++cr)
      out.A.block(dest[cr] * N, dest[cc] * N, N, N) =
          phase[cr] * std::conj(phase[cc]) * op.A.block(cr * N, cc * N, N, N);
  return out;
}

// debug dump: (2+d) little-endian u32 words (d, N, M_1..M_d), then row-major
// interleaved (re, im) doubles
inline void dump_operator(const FiniteOperator& op, const std::string& path) {
  FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw Error("cannot open " + path);
  auto put_u32 = [&](std::uint32_t v) {
    unsigned char b[4] = {(unsigned char)(v & 0xff), (unsigned char)((v >> 8) & 0xff),
                          (unsigned char)((v >> 16) & 0xff), (unsigned char)((v >> 24) & 0xff)};
    std::fwrite(b, 1, 4, f);
  };
  put_u32((std::uint32_t)op.geo.d);
  put_u32((std::uint32_t)op.geo.N);
  for (int M : op.geo.sizes) put_u32((std::uint32_t)M);
  const long n = op.geo.dim();
  std::vector<double> row(2 * n);
  for (long r = 0; r < n; ++r) {
    for (long c = 0; c < n; ++c) {
      row[2 * c] = op.A(r, c).real();
      row[2 * c + 1] = op.A(r, c).imag();
    }
    std::fwrite(row.data(), sizeof(double), row.size(), f);
  }
  std::fclose(f);
}

inline FiniteOperator load_operator(const std::string& path) {
  FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw Error("cannot open " + path);
  auto get_u32 = [&]() {
    unsigned char b[4];
    if (std::fread(b, 1, 4, f) != 4) throw Error("truncated operator dump");
    return (std::uint32_t)b[0] | ((std::uint32_t)b[1] << 8) | ((std::uint32_t)b[2] << 16) |
           ((std::uint32_t)b[3] << 24);
  };
  int d = (int)get_u32();
  int N = (int)get_u32();
  std::vector<int> sizes(d);
  for (int& M : sizes) M = (int)get_u32();
  TorusGeometry g(sizes, N);
  const long n = g.dim();
  Mat A(n, n);
  std::vector<double> row(2 * n);
  for (long r = 0; r < n; ++r) {
    if (std::fread(row.data(), sizeof(double), row.size(), f) != row.size())
      throw Error("truncated operator dump");
    for (long c = 0; c < n; ++c) A(r, c) = cplx(row[2 * c], row[2 * c + 1]);
  }
  std::fclose(f);
  return {g, std::move(A), false};
}

}  // namespace fvca
