#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fvca/fvca.hpp>

using namespace fvca;

namespace {
double max_abs(const Mat& A) { return A.cwiseAbs().maxCoeff(); }
}  // namespace

TEST_CASE("gamma matrices satisfy the Clifford relations") {
  for (int k = 1; k <= 6; ++k) {
    CliffordRep rep = gamma_matrices(k);
    REQUIRE((int)rep.gamma.size() == k);
    const long n = rep.gamma[0].rows();
    for (int i = 0; i < k; ++i) {
      CHECK(max_abs(rep.gamma[i] - rep.gamma[i].adjoint()) < 1e-14);
      for (int j = 0; j < k; ++j) {
        Mat anti = rep.gamma[i] * rep.gamma[j] + rep.gamma[j] * rep.gamma[i];
        Mat want = (i == j) ? Mat(2.0 * Mat::Identity(n, n)) : Mat(Mat::Zero(n, n));
        CHECK(max_abs(anti - want) < 1e-14);
      }
    }
    if (k % 2 == 0) {
      REQUIRE(rep.grading.has_value());
      const Mat& g0 = *rep.grading;
      CHECK(max_abs(g0 - g0.adjoint()) < 1e-14);
      CHECK(max_abs(g0 * g0 - Mat::Identity(n, n)) < 1e-14);
      for (int i = 0; i < k; ++i) CHECK(max_abs(g0 * rep.gamma[i] + rep.gamma[i] * g0) < 1e-14);
    } else {
      CHECK_FALSE(rep.grading.has_value());
    }
  }
  CHECK_THROWS_AS(gamma_matrices(7), Unsupported);
}

TEST_CASE("grading basis sorts the chirality eigenspaces") {
  // diagonal fast path
  Mat J = Mat::Zero(4, 4);
  J(0, 0) = -1;
  J(1, 1) = 1;
  J(2, 2) = 1;
  J(3, 3) = -1;
  Mat V = detail::grading_basis(J);
  Mat D = V.adjoint() * J * V;
  CHECK(D(0, 0).real() == doctest::Approx(1.0));
  CHECK(D(1, 1).real() == doctest::Approx(1.0));
  CHECK(D(2, 2).real() == doctest::Approx(-1.0));
  CHECK(D(3, 3).real() == doctest::Approx(-1.0));
  // generic path through the eigensolver
  Mat Jx = detail::pauli(1);
  Mat Vx = detail::grading_basis(Jx);
  Mat Dx = Vx.adjoint() * Jx * Vx;
  CHECK(std::abs(Dx(0, 0) - 1.0) < 1e-12);
  CHECK(std::abs(Dx(1, 1) + 1.0) < 1e-12);
  CHECK(std::abs(Dx(0, 1)) < 1e-12);
  CHECK_THROWS_AS(detail::grading_basis(Mat(2.0 * Mat::Identity(2, 2))), ConfigError);
}

TEST_CASE("chiral models anticommute with their grading") {
  // disordered chain
  {
    HoppingModel m = aiii_chain(0.8, 0.6, 1.2);
    REQUIRE(m.chiral.has_value());
    TorusGeometry g({12}, m.N);
    DisorderConfig cfg = sample_config(17, 0, g.cells(), m.channels);
    FiniteOperator H = build_hamiltonian(m, g, FluxMatrix(g), cfg);
    Mat Jfull = Mat::Zero(g.dim(), g.dim());
    for (long c = 0; c < g.cells(); ++c) Jfull.block(c * m.N, c * m.N, m.N, m.N) = *m.chiral;
    CHECK(max_abs(Jfull * H.A + H.A * Jfull) < 1e-13);
  }
  // 3D model with the chirality-preserving extra term
  {
    HoppingModel m = aiii_3d(1.0, 0.7, 0.0);
    REQUIRE(m.chiral.has_value());
    TorusGeometry g({4, 4, 4}, m.N);
    FiniteOperator H = build_hamiltonian(m, g, FluxMatrix(g));
    Mat Jfull = Mat::Zero(g.dim(), g.dim());
    for (long c = 0; c < g.cells(); ++c) Jfull.block(c * m.N, c * m.N, m.N, m.N) = *m.chiral;
    CHECK(max_abs(Jfull * H.A + H.A * Jfull) < 1e-13);
  }
}

TEST_CASE("model bookkeeping: ranges, channels, clean flags") {
  CHECK(hofstadter(0.0).clean);
  CHECK_FALSE(hofstadter(3.0).clean);
  CHECK(hofstadter(3.0).range() == 1);
  CHECK(kane_mele_up(4.0).range() == 1);
  CHECK(kane_mele_up(4.0).N == 2);
  CHECK(kane_mele_up(4.0).channels == 2);
  CHECK(aiii_chain(0.5, 0.1, 0.2).d == 1);
  CHECK(aiii_3d(0.0, 0.0, 0.0).clean);
  CHECK(hofstadter_supercell(1, 3).N == 3);
  CHECK_THROWS_AS(hofstadter_supercell(1, 1), ConfigError);
}

TEST_CASE("dimension parity of the Dirac constructions is enforced") {
  CHECK_THROWS_AS(clifford_dirac(3, 1.0, SymmetryClass::A), DimensionParity);
  CHECK_THROWS_AS(clifford_dirac(2, 1.0, SymmetryClass::AIII), DimensionParity);
  CHECK_NOTHROW(clifford_dirac(2, 1.0, SymmetryClass::A));
  CHECK_NOTHROW(clifford_dirac(1, 0.5, SymmetryClass::AIII));
  CHECK(clifford_dirac(1, 0.5, SymmetryClass::AIII).chiral.has_value());
  CHECK_FALSE(clifford_dirac(2, 1.0, SymmetryClass::A).chiral.has_value());
}

TEST_CASE("analytic chain localization length: limits and divergence") {
  // clean limit: Lambda^{-1} = |ln m|
  CHECK(analytic_loc_length_1d(0.5, 0.0, 0.0) == doctest::Approx(std::log(2.0)).epsilon(1e-10));
  CHECK(analytic_loc_length_1d(2.0, 0.0, 0.0) == doctest::Approx(std::log(2.0)).epsilon(1e-10));
  CHECK(analytic_loc_length_1d(1.0, 0.0, 0.0) == doctest::Approx(0.0));
  // continuity of the small-W branches against the closed form
  double direct = std::abs((1.0 / 1e-4 + 0.5) * std::log(2.0 + 1e-4) -
                           (1.0 / 1e-4 - 0.5) * std::log(2.0 - 1e-4) +
                           (0.5 / 2e-4 - 0.5) * std::log(1.0 - 2e-4) -
                           (0.5 / 2e-4 + 0.5) * std::log(1.0 + 2e-4));
  CHECK(analytic_loc_length_1d(0.5, 1e-4, 2e-4) == doctest::Approx(direct).epsilon(1e-6));
  CHECK_THROWS_AS(analytic_loc_length_1d(0.0, 0.3, 0.0), Divergence);
  // critical boundary in the clean limit sits at |m| = 1
  CHECK(analytic_loc_length_1d(0.999, 0.0, 0.0) < 2e-3);
  CHECK(analytic_loc_length_1d(0.5, 0.0, 0.0) > 0.5);
}

TEST_CASE("clean chain hamiltonian matches its Bloch fiber") {
  HoppingModel m = aiii_chain(0.5, 0.0, 0.0);
  BlochHamiltonian bh(m);
  // fiber offdiag block e^{-ik} - i m; dispersion +-|e^{-ik} - i m| with the
  // gap closing exactly at |m| = 1
  for (double k : {0.0, 0.7, 2.1}) {
    Mat h = bh.h({k});
    CHECK(std::abs(h(0, 1) - (std::exp(-I1 * k) - I1 * 0.5)) < 1e-14);
    CHECK(std::abs(h(0, 0)) < 1e-14);
    CHECK(std::abs(h(1, 1)) < 1e-14);
    Eigen::SelfAdjointEigenSolver<Mat> es(h);
    CHECK(es.eigenvalues()[1] == doctest::Approx(std::abs(std::exp(-I1 * k) - I1 * 0.5)));
  }
}
