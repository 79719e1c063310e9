#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fvca/fvca.hpp>

using namespace fvca;

namespace {

double max_abs(const Mat& A) { return A.cwiseAbs().maxCoeff(); }

FiniteOperator disordered_hofstadter(const TorusGeometry& g, int flux_n, double lambda,
                                     std::uint64_t seed) {
  FluxMatrix fl(g);
  fl.set(0, 1, flux_n);
  HoppingModel m = hofstadter(lambda);
  return build_hamiltonian(m, g, fl, sample_config(seed, 0, g.cells(), m.channels));
}

}  // namespace

TEST_CASE("full diagonalization reconstructs the operator") {
  TorusGeometry g({4, 4}, 1);
  FiniteOperator H = disordered_hofstadter(g, 1, 2.0, 31);
  EigenSystem es = eigh(H);
  for (long a = 1; a < es.eps.size(); ++a) CHECK(es.eps[a] >= es.eps[a - 1]);
  Mat R = es.phi * es.eps.asDiagonal().toDenseMatrix().cast<cplx>() * es.phi.adjoint();
  CHECK(max_abs(R - H.A) < 1e-12);
  CHECK(max_abs(es.phi.adjoint() * es.phi - Mat::Identity(g.dim(), g.dim())) < 1e-12);
  FiniteOperator bad{g, Mat::Random(g.dim(), g.dim()), false};
  CHECK_THROWS_AS(eigh(bad), NotHermitian);
}

TEST_CASE("range eigensolver selects exactly the window and spans it") {
  TorusGeometry g({6, 6}, 1);
  FiniteOperator H = disordered_hofstadter(g, 2, 1.5, 7);
  EigenSystem full = eigh(H);
  double lo = -2.0, hi = 0.5;
  EigenSystem part = eigh_range(H, lo, hi);
  long want = 0;
  for (long a = 0; a < full.eps.size(); ++a)
    if (full.eps[a] > lo && full.eps[a] <= hi) ++want;
  REQUIRE(part.eps.size() == want);
  long off = 0;
  while (full.eps[off] <= lo) ++off;
  for (long a = 0; a < want; ++a) CHECK(part.eps[a] == doctest::Approx(full.eps[off + a]).epsilon(1e-12));
  // same spectral projection regardless of the eigenvector phases
  Mat Pfull = Mat::Zero(g.dim(), g.dim());
  detail::herk_accumulate(Pfull, full.phi.middleCols(off, want));
  Mat Ppart = Mat::Zero(g.dim(), g.dim());
  detail::herk_accumulate(Ppart, part.phi);
  CHECK(max_abs(Pfull - Ppart) < 1e-11);
  CHECK_THROWS_AS(eigh_range(FiniteOperator{g, Mat::Random(g.dim(), g.dim()), false}, 0.0, 1.0),
                  NotHermitian);
}

TEST_CASE("fermi projection is an orthogonal projection of the right rank") {
  TorusGeometry g({4, 4}, 1);
  FiniteOperator H = disordered_hofstadter(g, 1, 2.0, 5);
  EigenSystem es = eigh(H);
  double eps_F = 0.3;
  FiniteOperator P = fermi_projection(es, eps_F);
  CHECK(max_abs(P.A - P.A.adjoint()) < 1e-13);
  CHECK(max_abs(P.A * P.A - P.A) < 1e-12);
  CHECK(std::abs(P.A.trace().real() - (double)fermi_count(es, eps_F)) < 1e-10);
  CHECK(max_abs(H.A * P.A - P.A * H.A) < 1e-11);
  // empty and full edge cases
  CHECK(max_abs(fermi_projection(es, es.eps[0] - 1.0).A) == 0.0);
  CHECK(max_abs(fermi_projection(es, es.eps[es.eps.size() - 1] + 1.0).A -
                Mat::Identity(g.dim(), g.dim())) < 1e-12);
}

TEST_CASE("interval projection splits the fermi projection additively") {
  TorusGeometry g({4, 4}, 1);
  FiniteOperator H = disordered_hofstadter(g, 1, 2.0, 5);
  EigenSystem es = eigh(H);
  double cut = -1.0, top = 0.7;
  Mat sum = interval_projection(es, es.eps[0] - 1.0, cut).A +
            interval_projection(es, std::nextafter(cut, 1e300), top).A;
  CHECK(max_abs(sum - fermi_projection(es, top).A) < 1e-12);
}

TEST_CASE("fermi-dirac smoothing interpolates between 0, projection, and 1/2") {
  TorusGeometry g({4, 4}, 1);
  FiniteOperator H = disordered_hofstadter(g, 1, 2.0, 9);
  EigenSystem es = eigh(H);
  double eps_F = 0.25;
  Mat cold = fermi_dirac_matrix(es, eps_F, 1e-4).A;
  CHECK(max_abs(cold - fermi_projection(es, eps_F).A) < 1e-10);
  Mat hot = fermi_dirac_matrix(es, 0.0, 1e6).A;
  CHECK(max_abs(hot - 0.5 * Mat::Identity(g.dim(), g.dim())) < 1e-5);
  CHECK_THROWS_AS(fermi_dirac_matrix(es, 0.0, 0.0), NonpositiveTemperature);
  CHECK_THROWS_AS(fermi_dirac_matrix(es, 0.0, -1.0), NonpositiveTemperature);
}

TEST_CASE("the two fermi-unitary routes agree on a chiral chain") {
  HoppingModel m = aiii_chain(0.6, 0.4, 0.9);
  TorusGeometry g({12}, m.N);
  DisorderConfig cfg = sample_config(23, 0, g.cells(), m.channels);
  FiniteOperator H = build_hamiltonian(m, g, FluxMatrix(g), cfg);
  FermiUnitary a = fermi_unitary_chiral(H, *m.chiral);
  FermiUnitary b = fermi_unitary_at_zero(eigh(H), *m.chiral);
  CHECK(a.unitarity_defect < 1e-12);
  CHECK(b.unitarity_defect < 1e-12);
  CHECK(max_abs(a.U.A - b.U.A) < 1e-10);
  CHECK(a.U.geo.N == 1);
}

TEST_CASE("chirality violations are detected, not silently accepted") {
  HoppingModel m = aiii_chain(0.6, 0.0, 0.0);
  TorusGeometry g({8}, m.N);
  FiniteOperator H = build_hamiltonian(m, g, FluxMatrix(g));
  // a projection off the chiral point has a large diagonal grading block
  EigenSystem es = eigh(H);
  CHECK_THROWS_AS(fermi_unitary(fermi_projection(es, 0.9), *m.chiral), ChiralityViolation);
  // a Hamiltonian with a scalar shift is no longer exactly chiral
  FiniteOperator Hs{g, H.A + 0.3 * Mat::Identity(g.dim(), g.dim()), true};
  CHECK_THROWS_AS(fermi_unitary_chiral(Hs, *m.chiral), ChiralityViolation);
}

TEST_CASE("spectral kernels have the right mass and reject bad widths") {
  TorusGeometry g({4, 4}, 1);
  EigenSystem es = eigh(disordered_hofstadter(g, 1, 1.0, 3));
  std::vector<double> grid;
  for (double e = -30.0; e <= 30.0; e += 0.01) grid.push_back(e);
  RMat G = spectral_kernel(es, grid, KernelKind::gaussian, 0.1);
  RMat L = spectral_kernel(es, grid, KernelKind::lorentzian, 0.1);
  // each eigenvalue column integrates to 1 (gaussian) and pi (lorentzian)
  CHECK(G.col(0).sum() * 0.01 == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(L.col(0).sum() * 0.01 == doctest::Approx(pi).epsilon(1e-2));
  CHECK_THROWS_AS(spectral_kernel(es, grid, KernelKind::gaussian, 0.0), NonpositiveWidth);
}
