#pragma once

#include <map>

#include "models.hpp"

namespace fvca {

// Clean-limit Bloch fiber h(k) = w_0 + sum_{y>0} (e^{ik.y} w_y + h.c.) with
// analytic derivatives; the independent oracle for the finite-volume code.
struct BlochHamiltonian {
  int d = 0;
  int N = 1;
  Mat w0;
  std::vector<std::pair<std::vector<int>, Mat>> hops;  // y > 0 lexicographically

  explicit BlochHamiltonian(const HoppingModel& model) : d(model.d), N(model.N) {
    if (!model.clean) throw NotClean("Bloch decomposition needs a clean model");
    LocalView clean_view;  // null config: disorder channels evaluate to zero
    w0 = Mat::Zero(N, N);
    for (const auto& h : model.hops) {
      Mat w = h.w(clean_view);
      if (std::all_of(h.y.begin(), h.y.end(), [](int v) { return v == 0; }))
        w0 += 0.5 * (w + w.adjoint());
      else
        hops.emplace_back(h.y, w);
    }
  }

  Mat h(const std::vector<double>& k) const {
    Mat out = w0;
    for (const auto& [y, w] : hops) {
      double ky = 0.0;
      for (int j = 0; j < d; ++j) ky += k[j] * y[j];
      cplx ph = std::exp(I1 * ky);
      out += ph * w + std::conj(ph) * w.adjoint();
    }
    return out;
  }

  Mat dh(const std::vector<double>& k, int j) const {
    Mat out = Mat::Zero(N, N);
    for (const auto& [y, w] : hops) {
      if (y[j] == 0) continue;
      double ky = 0.0;
      for (int l = 0; l < d; ++l) ky += k[l] * y[l];
      cplx ph = I1 * (double)y[j] * std::exp(I1 * ky);
      out += ph * w + std::conj(ph) * w.adjoint();
    }
    return out;
  }
};

namespace detail {
inline double fd(double eps, double mu, double T) {
  return 1.0 / (1.0 + std::exp(std::clamp((eps - mu) / T, -700.0, 700.0)));
}
// first divided difference of the Fermi-Dirac function
inline double fd_dd(double a, double b, double mu, double T) {
  if (std::abs(a - b) < 1e-8) {
    double z = std::clamp((0.5 * (a + b) - mu) / T, -350.0, 350.0);
    double c = std::exp(z / 2.0) + std::exp(-z / 2.0);
    return -1.0 / (T * c * c);
  }
  return (fd(a, mu, T) - fd(b, mu, T)) / (a - b);
}
}  // namespace detail

// k-space Kubo integral on an n^d grid; n = 0 doubles the grid until two
// successive refinements agree to 1e-10
inline cplx kubo_clean(const HoppingModel& model, int i, int j, double eps_F, double T, double Gamma,
                       int k_grid = 0) {
  if (T <= 0.0) throw NonpositiveTemperature("kubo requires T > 0");
  if (Gamma <= 0.0) throw NonpositiveWidth("kubo requires Gamma > 0");
  BlochHamiltonian bh(model);
  auto eval = [&](int n) {
    cplx total = 0.0;
    std::vector<double> k(bh.d, 0.0);
    std::vector<int> l(bh.d, 0);
    long npts = 1;
    for (int a = 0; a < bh.d; ++a) npts *= n;
    for (long p = 0; p < npts; ++p) {
      long rem = p;
      for (int a = bh.d - 1; a >= 0; --a) {
        l[a] = (int)(rem % n);
        rem /= n;
        k[a] = 2.0 * pi * l[a] / n;
      }
      Eigen::SelfAdjointEigenSolver<Mat> es(bh.h(k));
      const auto& eps = es.eigenvalues();
      Mat A = es.eigenvectors().adjoint() * bh.dh(k, i) * es.eigenvectors();
      Mat B = es.eigenvectors().adjoint() * bh.dh(k, j) * es.eigenvectors();
      for (int a = 0; a < bh.N; ++a)
        for (int b = 0; b < bh.N; ++b)
          total += A(b, a) * detail::fd_dd(eps[a], eps[b], eps_F, T) * B(a, b) /
                   (Gamma + I1 * (eps[a] - eps[b]));
    }
    return -total / (double)npts;
  };
  if (k_grid > 0) return eval(k_grid);
  cplx prev = eval(64);
  for (int n = 128; n <= 4096; n *= 2) {
    cplx cur = eval(n);
    if (std::abs(cur - prev) < 1e-10) return cur;
    prev = cur;
  }
  throw ConvergenceFailure("k-grid refinement did not converge to 1e-10");
}

// Finite-volume conductivity of a clean zero-flux model, evaluated exactly.
// H and f_FD(H) are translation invariant, so every factor in the Kubo trace
// is block-diagonal over the M_1 x ... x M_d Bloch momenta; the approximate
// derivation acts on a translation-invariant symbol as a circular
// convolution along one momentum axis with weights
//   c_j(m) = (-i/M_j) sum_u wrap(u) exp(-2 pi i m u / M_j).
// Agrees with kubo_conductivity on the same torus to roundoff, at
// O(V N^3 + V max(M) N^2) cost instead of O((V N)^3).
inline std::vector<cplx> kubo_clean_finite(const HoppingModel& model, const std::vector<int>& sizes,
                                           int i, int j, const std::vector<double>& eps_F_list,
                                           double T, double Gamma) {
  if (T <= 0.0) throw NonpositiveTemperature("kubo requires T > 0");
  if (Gamma <= 0.0) throw NonpositiveWidth("kubo requires Gamma > 0");
  if (!model.clean) throw NotClean("finite Bloch evaluation needs a clean model");
  if ((int)sizes.size() != model.d) throw ConfigError("size list does not match model dimension");
  TorusGeometry g(sizes, model.N);
  int minM = *std::min_element(sizes.begin(), sizes.end());
  if (2 * model.range() > minM)
    throw RangeTooLarge("hopping range exceeds min(M)/2: wrapped displacement ambiguous");
  const int N = model.N;
  const long V = g.cells();
  // torus kernel K(u), accumulated so that aliased displacements (+y = -y mod
  // M) sum exactly as in build_hamiltonian
  std::map<long, Mat> ker;
  LocalView clean_view;
  std::vector<int> u(g.d);
  for (const auto& h : model.hops) {
    Mat w = h.w(clean_view);
    if (std::all_of(h.y.begin(), h.y.end(), [](int v) { return v == 0; })) {
      auto [it, fresh] = ker.try_emplace(0, Mat::Zero(N, N));
      it->second += 0.5 * (w + w.adjoint());
      continue;
    }
    for (int a = 0; a < g.d; ++a) u[a] = ((h.y[a] % sizes[a]) + sizes[a]) % sizes[a];
    auto [it, fresh] = ker.try_emplace(g.cell_index(u), Mat::Zero(N, N));
    it->second += w;
    for (int a = 0; a < g.d; ++a) u[a] = (sizes[a] - u[a]) % sizes[a];
    auto [it2, fresh2] = ker.try_emplace(g.cell_index(u), Mat::Zero(N, N));
    it2->second += w.adjoint();
  }
  // per-momentum symbols of H and of d_i H, with plane waves e^{i k.x}
  std::vector<RVec> eps((size_t)V);
  std::vector<Mat> phi((size_t)V), Ahat((size_t)V);
  for (long p = 0; p < V; ++p) {
    auto l = g.cell_coords(p);
    Mat hk = Mat::Zero(N, N), ak = Mat::Zero(N, N);
    for (const auto& [ui, w] : ker) {
      auto uc = g.cell_coords(ui);
      double ku = 0.0;
      for (int a = 0; a < g.d; ++a) ku += 2.0 * pi * l[a] * uc[a] / sizes[a];
      cplx ph = std::exp(-I1 * ku);
      hk += ph * w;
      ak += (ph * cplx(0.0, -1.0) * (double)wrap1(uc[i], sizes[i])) * w;
    }
    Eigen::SelfAdjointEigenSolver<Mat> s(hk);
    eps[(size_t)p] = s.eigenvalues();
    phi[(size_t)p] = s.eigenvectors();
    Ahat[(size_t)p] = ak;
  }
  // convolution weights of the approximate derivation along axis j
  const int Mj = sizes[j];
  std::vector<cplx> cj((size_t)Mj);
  for (int m = 0; m < Mj; ++m) {
    cplx s = 0.0;
    for (int w = 0; w < Mj; ++w)
      s += (double)wrap1(w, Mj) * std::exp(-I1 * (2.0 * pi * m * w / Mj));
    cj[(size_t)m] = -I1 * s / (double)Mj;
  }
  std::vector<cplx> out;
  std::vector<Mat> Ghat((size_t)V);
  std::vector<int> lshift(g.d);
  for (double eps_F : eps_F_list) {
    for (long p = 0; p < V; ++p) {
      RVec f(N);
      for (int a = 0; a < N; ++a) {
        double z = std::clamp((eps[(size_t)p][a] - eps_F) / T, -700.0, 700.0);
        f[a] = 1.0 / (1.0 + std::exp(z));
      }
      Ghat[(size_t)p] = phi[(size_t)p] * f.asDiagonal() * phi[(size_t)p].adjoint();
    }
    cplx S = 0.0;
    for (long p = 0; p < V; ++p) {
      auto l = g.cell_coords(p);
      Mat Bhat = Mat::Zero(N, N);
      lshift = l;
      for (int m = 0; m < Mj; ++m) {
        lshift[j] = m;
        Bhat += cj[(size_t)((l[j] - m + Mj) % Mj)] * Ghat[(size_t)g.cell_index(lshift)];
      }
      Mat Ar = phi[(size_t)p].adjoint() * Ahat[(size_t)p] * phi[(size_t)p];
      Mat Br = phi[(size_t)p].adjoint() * Bhat * phi[(size_t)p];
      for (int a = 0; a < N; ++a)
        for (int b = 0; b < N; ++b)
          S += Ar(b, a) * Br(a, b) / (Gamma + I1 * (eps[(size_t)p][a] - eps[(size_t)p][b]));
    }
    out.push_back(-S / (double)V);
  }
  return out;
}

// even Chern number of the lowest nbands bands via gauge-invariant plaquette
// link variables (d = 2)
inline double chern_k(const HoppingModel& model, int nbands, int k_grid = 200) {
  BlochHamiltonian bh(model);
  if (bh.d != 2) throw Unsupported("chern_k handles d = 2");
  if (nbands < 1 || nbands >= bh.N) throw ConfigError("band selection out of range");
  const int n = k_grid;
  std::vector<Mat> psi((size_t)n * n);
  double mingap = 1e300;
  for (int l1 = 0; l1 < n; ++l1)
    for (int l2 = 0; l2 < n; ++l2) {
      Eigen::SelfAdjointEigenSolver<Mat> es(bh.h({2.0 * pi * l1 / n, 2.0 * pi * l2 / n}));
      mingap = std::min(mingap, es.eigenvalues()[nbands] - es.eigenvalues()[nbands - 1]);
      psi[(size_t)l1 * n + l2] = es.eigenvectors().leftCols(nbands);
    }
  if (mingap < 1e-8) throw GapClosed("selected bands touch the rest of the spectrum");
  auto link = [&](int a1, int a2, int b1, int b2) {
    return Mat(psi[(size_t)(a1 % n) * n + (a2 % n)].adjoint() * psi[(size_t)(b1 % n) * n + (b2 % n)])
        .determinant();
  };
  // loop orientation chosen so the result matches the real-space Ch_{12}
  // of the same model (and the Streda slope d(filling)/df)
  double total = 0.0;
  for (int l1 = 0; l1 < n; ++l1)
    for (int l2 = 0; l2 < n; ++l2) {
      cplx u = link(l1, l2, l1, l2 + 1) * link(l1, l2 + 1, l1 + 1, l2 + 1) *
               link(l1 + 1, l2 + 1, l1 + 1, l2) * link(l1 + 1, l2, l1, l2);
      total += std::arg(u);
    }
  return total / (2.0 * pi);
}

// odd Chern (winding) number of a clean chiral d = 1 model by phase
// accumulation of det of the off-diagonal block
inline double winding_k(const HoppingModel& model, int k_grid = 10000) {
  BlochHamiltonian bh(model);
  if (bh.d != 1) throw Unsupported("winding_k handles d = 1");
  if (!model.chiral) throw ConfigError("winding_k needs a chiral grading");
  Mat V = detail::grading_basis(*model.chiral);
  const int half = bh.N / 2;
  double total = 0.0;
  cplx prev = 0.0;
  for (int l = 0; l <= k_grid; ++l) {
    Mat blk = V.adjoint() * bh.h({2.0 * pi * l / k_grid}) * V;
    cplx det = Mat(blk.block(half, 0, half, half)).determinant();
    if (std::abs(det) < 1e-12) throw GapClosed("gap closes on the k-grid");
    if (l > 0) total += std::arg(det / prev);
    prev = det;
  }
  return total / (2.0 * pi);
}

// Hofstadter at rational flux p/q as a clean q-fiber supercell model: the
// gauge puts phase exp(2 pi i p x2 / q) on direction-1 hops, so folding x2
// mod q into the fiber gives a flux-free Bloch family (Harper matrix).
inline HoppingModel hofstadter_supercell(int p, int q) {
  if (q < 2) throw ConfigError("supercell denominator must be >= 2");
  HoppingModel m;
  m.id = "hofstadter_supercell";
  m.d = 2;
  m.N = q;
  m.channels = 1;
  m.clean = true;
  m.params = {{"p", (double)p}, {"q", (double)q}};
  Mat intra = Mat::Zero(q, q), hop1 = Mat::Zero(q, q), hop2 = Mat::Zero(q, q);
  for (int mm = 0; mm + 1 < q; ++mm) {
    intra(mm + 1, mm) = 1.0;
    intra(mm, mm + 1) = 1.0;
  }
  for (int mm = 0; mm < q; ++mm) hop1(mm, mm) = std::exp(I1 * (2.0 * pi * p * mm / q));
  hop2(0, q - 1) = 1.0;
  m.hops.push_back({{0, 0}, [intra](const LocalView&) { return intra; }});
  m.hops.push_back({{1, 0}, [hop1](const LocalView&) { return hop1; }});
  m.hops.push_back({{0, 1}, [hop2](const LocalView&) { return hop2; }});
  return m;
}

// extremal energies of band `b` (0-based, ascending) over the k-grid
struct BandRange {
  double lo, hi;
};
inline BandRange band_range(const HoppingModel& model, int b, int k_grid = 120) {
  BlochHamiltonian bh(model);
  BandRange r{1e300, -1e300};
  std::vector<double> k(bh.d, 0.0);
  std::vector<int> l(bh.d, 0);
  long npts = 1;
  for (int a = 0; a < bh.d; ++a) npts *= k_grid;
  for (long pidx = 0; pidx < npts; ++pidx) {
    long rem = pidx;
    for (int a = bh.d - 1; a >= 0; --a) {
      l[a] = (int)(rem % k_grid);
      rem /= k_grid;
      k[a] = 2.0 * pi * l[a] / k_grid;
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(bh.h(k));
    r.lo = std::min(r.lo, es.eigenvalues()[b]);
    r.hi = std::max(r.hi, es.eigenvalues()[b]);
  }
  return r;
}

}  // namespace fvca
