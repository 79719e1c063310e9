#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <optional>

#include "disorder.hpp"
#include "torus.hpp"

namespace fvca {

// Disorder variables as seen from a hopping term anchored at a cell: offsets
// are relative, so assembled Hamiltonians are covariant by construction.
struct LocalView {
  const DisorderConfig* cfg = nullptr;  // nullptr = clean evaluation
  const TorusGeometry* geo = nullptr;
  std::vector<int> anchor;

  double operator()(const std::vector<int>& offset, int channel) const {
    if (!cfg) return 0.0;
    std::vector<int> x(geo->d);
    for (int j = 0; j < geo->d; ++j)
      x[j] = (int)((((long)anchor[j] + offset[j]) % geo->sizes[j] + geo->sizes[j]) % geo->sizes[j]);
    return cfg->at(geo->cell_index(x), channel);
  }
  double here(int channel) const {
    return cfg ? (*this)(std::vector<int>(geo->d, 0), channel) : 0.0;
  }
};

struct HoppingTerm {
  std::vector<int> y;  // y == 0 or y > 0 lexicographically
  std::function<Mat(const LocalView&)> w;
};

// A covariant lattice model: hops are stored one per +/- pair (plus the
// on-site block); the negative partners come from Hermitian conjugation.
struct HoppingModel {
  std::string id;
  int d = 0;
  int N = 1;
  int channels = 0;
  std::vector<HoppingTerm> hops;
  std::optional<Mat> chiral;  // fiber-level grading J, J^2 = 1, JHJ = -H
  bool clean = false;         // no active disorder channel
  std::map<std::string, double> params;

  int range() const {
    int r = 0;
    for (const auto& h : hops)
      for (int v : h.y) r = std::max(r, std::abs(v));
    return r;
  }
};

namespace detail {
inline bool lex_nonneg(const std::vector<int>& y) {
  for (int v : y) {
    if (v > 0) return true;
    if (v < 0) return false;
  }
  return true;  // y == 0
}
inline Mat pauli(int k) {
  Mat s(2, 2);
  switch (k) {
    case 0: s << 1, 0, 0, 1; break;
    case 1: s << 0, 1, 1, 0; break;
    case 2: s << 0, -I1, I1, 0; break;
    default: s << 1, 0, 0, -1; break;
  }
  return s;
}
inline Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}
// site-wise basis change putting the fiber grading into diag(1,...,1,-1,...,-1)
inline Mat grading_basis(const Mat& J) {
  const int N = (int)J.rows();
  if ((J * J - Mat::Identity(N, N)).cwiseAbs().maxCoeff() > 1e-10)
    throw ConfigError("chiral grading must square to one");
  bool diag = true;
  for (int i = 0; i < N && diag; ++i)
    for (int k = 0; k < N && diag; ++k)
      if (i != k && std::abs(J(i, k)) > 1e-14) diag = false;
  if (diag) {
    // stable: +1 sites first, original order preserved within each block
    Mat V = Mat::Zero(N, N);
    int col = 0;
    for (int pass = 0; pass < 2; ++pass)
      for (int i = 0; i < N; ++i)
        if ((pass == 0 && J(i, i).real() > 0) || (pass == 1 && J(i, i).real() < 0)) V(i, col++) = 1.0;
    if (col != N) throw ConfigError("grading eigenvalues must be +-1 with equal multiplicity");
    return V;
  }
  Eigen::SelfAdjointEigenSolver<Mat> s(J);  // ascending eigenvalues: -1 block first
  if (std::abs(s.eigenvalues()[N / 2 - 1] + 1.0) > 1e-10 || std::abs(s.eigenvalues()[N / 2] - 1.0) > 1e-10)
    throw ConfigError("grading eigenvalues must be +-1 with equal multiplicity");
  Mat V(N, N);
  V.leftCols(N / 2) = s.eigenvectors().rightCols(N / 2);
  V.rightCols(N / 2) = s.eigenvectors().leftCols(N / 2);
  return V;
}
}  // namespace detail

struct CliffordRep {
  int k = 0;
  std::vector<Mat> gamma;   // gamma_1..gamma_k, Hermitian, pairwise anticommuting
  std::optional<Mat> grading;  // gamma_0 for even k
};

inline CliffordRep gamma_matrices(int k) {
  if (k < 1 || k > 6) throw Unsupported("gamma_matrices supports k = 1..6");
  using detail::kron;
  using detail::pauli;
  std::vector<Mat> g;
  if (k <= 3) {
    for (int j = 1; j <= k; ++j) g.push_back(pauli(j));
  } else {
    CliffordRep lower = gamma_matrices(k - 2);
    Mat idl = Mat::Identity(lower.gamma[0].rows(), lower.gamma[0].rows());
    for (const Mat& gj : lower.gamma) g.push_back(kron(pauli(1), gj));
    g.push_back(kron(pauli(2), idl));
    g.push_back(kron(pauli(3), idl));
  }
  CliffordRep rep;
  rep.k = k;
  rep.gamma = std::move(g);
  if (k % 2 == 0) {
    Mat g0 = Mat::Identity(rep.gamma[0].rows(), rep.gamma[0].rows());
    for (const Mat& gj : rep.gamma) g0 = (g0 * gj).eval();
    g0 *= std::pow(-I1, k / 2);
    rep.grading = g0;
  }
  return rep;
}

// square lattice, nearest-neighbor hops of amplitude 1, on-site disorder
inline HoppingModel hofstadter(double lambda) {
  HoppingModel m;
  m.id = "hofstadter";
  m.d = 2;
  m.N = 1;
  m.channels = 1;
  m.clean = (lambda == 0.0);
  m.params = {{"lambda", lambda}};
  Mat one = Mat::Constant(1, 1, 1.0);
  m.hops.push_back({{1, 0}, [one](const LocalView&) { return one; }});
  m.hops.push_back({{0, 1}, [one](const LocalView&) { return one; }});
  m.hops.push_back({{0, 0}, [lambda](const LocalView& v) {
                      return Mat::Constant(1, 1, lambda * v.here(0));
                    }});
  return m;
}

// spin-up Kane-Mele sector: honeycomb with two sites (A, B) per cell,
// nearest-neighbor hopping 1, imaginary Haldane second-neighbor hopping with
// opposite orientation on the two sublattices, per-site disorder lambda*w
inline HoppingModel kane_mele_up(double lambda) {
  HoppingModel m;
  m.id = "kane_mele_up";
  m.d = 2;
  m.N = 2;
  m.channels = 2;
  m.clean = (lambda == 0.0);
  m.params = {{"lambda", lambda}};
  // per-hop Haldane amplitude.  The clean gap equals 2 for any amplitude up
  // to 1/sqrt(3) (the band edge sits at the M points, where the Haldane mass
  // vanishes), so the gap alone cannot fix this factor; the disordered
  // ensemble means at partial filling do, and they pin 0.3 per directed
  // second-neighbor matrix element.
  const double t2 = 0.3;
  Mat eab = Mat::Zero(2, 2), sz = detail::pauli(3), sx = detail::pauli(1);
  eab(0, 1) = 1.0;
  m.hops.push_back({{0, 0}, [lambda, sx](const LocalView& v) {
                      Mat w = sx;
                      w(0, 0) += lambda * v.here(0);
                      w(1, 1) += lambda * v.here(1);
                      return w;
                    }});
  Mat w10 = eab + I1 * t2 * sz;   // NN bond B(x-e1)<->A(x) and NNN along +e1
  Mat w01 = eab - I1 * t2 * sz;   // NN bond B(x-e2)<->A(x) and NNN along -(e2-e1) partner
  Mat w1m1 = -I1 * t2 * sz;       // NNN along -(e2-e1)
  m.hops.push_back({{1, 0}, [w10](const LocalView&) { return w10; }});
  m.hops.push_back({{0, 1}, [w01](const LocalView&) { return w01; }});
  m.hops.push_back({{1, -1}, [w1m1](const LocalView&) { return w1m1; }});
  return m;
}

// chiral 1D chain: mass m_x = m + W2*w', hop t_x = 1 + W1*w, grading sigma_3
inline HoppingModel aiii_chain(double m0, double W1, double W2) {
  HoppingModel m;
  m.id = "aiii_chain";
  m.d = 1;
  m.N = 2;
  m.channels = 2;
  m.clean = (W1 == 0.0 && W2 == 0.0);
  m.params = {{"m", m0}, {"W1", W1}, {"W2", W2}};
  Mat s2 = detail::pauli(2);
  Mat sminus = Mat::Zero(2, 2);
  sminus(1, 0) = 1.0;
  m.hops.push_back({{0}, [m0, W2, s2](const LocalView& v) {
                      return ((m0 + W2 * v.here(1)) * s2).eval();
                    }});
  m.hops.push_back({{1}, [W1, sminus](const LocalView& v) {
                      return ((1.0 + W1 * v.here(0)) * sminus).eval();
                    }});
  m.chiral = detail::pauli(3);
  return m;
}

// Dirac-type lattice models gamma.sin(k) + gamma_mass (m + sum cos(k))
namespace detail {
inline HoppingModel dirac_model(std::string id, int d, const std::vector<Mat>& gam, const Mat& mass,
                                Mat onsite_extra, std::optional<Mat> grading, double m0, double lambda) {
  HoppingModel m;
  m.id = std::move(id);
  m.d = d;
  m.N = (int)mass.rows();
  m.channels = lambda != 0.0 ? 1 : 0;
  if (m.channels == 0) m.channels = 1;  // keep shape stable; channel unused when clean
  m.clean = (lambda == 0.0);
  Mat w0 = m0 * mass + onsite_extra;
  m.hops.push_back({std::vector<int>(d, 0), [w0, lambda, mass](const LocalView& v) {
                      Mat w = w0;
                      if (lambda != 0.0)
                        w += lambda * v.here(0) * Mat::Identity(w.rows(), w.cols());
                      return w;
                    }});
  for (int j = 0; j < d; ++j) {
    std::vector<int> y(d, 0);
    y[j] = 1;
    Mat w = (gam[j] / (2.0 * I1) + 0.5 * mass).eval();
    m.hops.push_back({y, [w](const LocalView&) { return w; }});
  }
  m.chiral = std::move(grading);
  return m;
}
}  // namespace detail

// 3D chiral model: Dirac hops, gamma_4 mass, a gamma_1gamma_3gamma_4 term
// breaking time-reversal/particle-hole, scalar on-site disorder.  Note the
// scalar disorder commutes (not anticommutes) with gamma_0, so per-config
// chirality is exact only at lambda = 0.
inline HoppingModel aiii_3d(double m0, double t, double lambda) {
  CliffordRep rep = gamma_matrices(4);
  Mat extra = (I1 * t * rep.gamma[0] * rep.gamma[2] * rep.gamma[3]).eval();
  // the grading sign fixes the orientation of the flat-band unitary; the
  // negative sign makes the clean m = 0 point carry Ch_3 = -2 (and m = +-2
  // carry +1), consistent with the 1D chain's winding = +1 convention
  Mat grading = (-(*rep.grading)).eval();
  HoppingModel m = detail::dirac_model("aiii_3d", 3, rep.gamma, rep.gamma[3], extra, grading, m0, lambda);
  m.params = {{"m", m0}, {"t", t}, {"lambda", lambda}};
  return m;
}

enum class SymmetryClass { A, AIII };

// clean Dirac lattice model with invariant (-1)^n binom(d-1, n) on the mass
// window m in (-d+2n, -d+2n+2); gap closes at m in {-d, -d+2, ..., d}
inline HoppingModel clifford_dirac(int d, double m0, SymmetryClass cls) {
  if (cls == SymmetryClass::A && d % 2 != 0)
    throw DimensionParity("class A requires even d");
  if (cls == SymmetryClass::AIII && d % 2 != 1)
    throw DimensionParity("class AIII requires odd d");
  HoppingModel m;
  if (cls == SymmetryClass::A) {
    CliffordRep rep = gamma_matrices(d);
    m = detail::dirac_model("clifford_dirac", d, rep.gamma, *rep.grading,
                            Mat::Zero(rep.grading->rows(), rep.grading->cols()), std::nullopt, m0, 0.0);
  } else {
    CliffordRep rep = gamma_matrices(d + 1);
    m = detail::dirac_model("clifford_dirac", d, rep.gamma, rep.gamma[d],
                            Mat::Zero(rep.gamma[d].rows(), rep.gamma[d].cols()), rep.grading, m0, 0.0);
  }
  m.params = {{"d", (double)d}, {"m", m0}, {"class", cls == SymmetryClass::A ? 0.0 : 1.0}};
  return m;
}

// closed-form inverse localization length of the disordered chiral chain at
// zero energy; Lambda^{-1} = 0 is the critical surface
inline double analytic_loc_length_1d(double m, double W1, double W2) {
  if (m == 0.0 && W2 == 0.0) throw Divergence("mass identically zero");
  // (c +- 1/2) ln|arg| with the x ln x limit at arg -> 0 (there c -> 0 too)
  auto xlog = [](double coeff, double arg) {
    double a = std::abs(arg);
    return a < 1e-14 ? 0.0 : coeff * std::log(a);
  };
  // ln |2+W|^{1/W+1/2} / |2-W|^{1/W-1/2}  ->  1 + ln 2  as W -> 0
  auto hop_part = [&](double W) {
    if (W < 1e-6) return 1.0 - W * W / 24.0 + std::log(2.0);
    return xlog(1.0 / W + 0.5, 2.0 + W) - xlog(1.0 / W - 0.5, 2.0 - W);
  };
  // ln |2m-W|^{m/W-1/2} / |2m+W|^{m/W+1/2}  ->  -1 - ln(2|m|)  as W -> 0
  auto mass_part = [&](double m_, double W) {
    if (W < 1e-6 * m_) return -1.0 - std::log(2.0 * m_) + W * W / (24.0 * m_ * m_);
    return xlog(m_ / W - 0.5, 2.0 * m_ - W) - xlog(m_ / W + 0.5, 2.0 * m_ + W);
  };
  return std::abs(hop_part(W1) + mass_part(std::abs(m), W2));
}

}  // namespace fvca
