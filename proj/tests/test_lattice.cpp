#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fvca/fvca.hpp>

using namespace fvca;

namespace {

Mat random_mat(long n, std::uint64_t seed) {
  Mat A(n, n);
  for (long c = 0; c < n; ++c)
    for (long r = 0; r < n; ++r)
      A(r, c) = cplx(u64_to_unit_centered(splitmix64(seed)), u64_to_unit_centered(splitmix64(seed)));
  return A;
}

double max_abs(const Mat& A) { return A.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("wrapped displacement covers the balanced residue window") {
  CHECK(wrap1(0, 5) == 0);
  CHECK(wrap1(2, 5) == 2);
  CHECK(wrap1(3, 5) == -2);
  CHECK(wrap1(7, 5) == 2);
  CHECK(wrap1(-3, 5) == 2);
  // even M: the tie at M/2 goes to -M/2
  CHECK(wrap1(2, 4) == -2);
  CHECK(wrap1(-2, 4) == -2);
  CHECK(wrap1(1, 4) == 1);
  CHECK(wrap1(3, 4) == -1);
  for (int M : {2, 3, 4, 5, 8, 9})
    for (long d = -3 * M; d <= 3 * M; ++d) {
      int w = wrap1(d, M);
      CHECK(w >= -(M / 2));
      CHECK(w <= (M + 1) / 2 - 1);
      CHECK(((d - w) % M + M) % M == 0);
    }
}

TEST_CASE("torus indexing round-trips and validates its arguments") {
  TorusGeometry g({4, 3, 2}, 2);
  CHECK(g.cells() == 24);
  CHECK(g.dim() == 48);
  for (long c = 0; c < g.cells(); ++c) CHECK(g.cell_index(g.cell_coords(c)) == c);
  CHECK(g.cell_index({1, 0, 0}) == 6);  // first coordinate slowest
  CHECK(g.site(5, 1) == 11);
  CHECK_THROWS_AS(TorusGeometry({2, 2, 2, 2, 2}, 1), ConfigError);
  CHECK_THROWS_AS(TorusGeometry({4, 1}, 1), ConfigError);
  CHECK_THROWS_AS(TorusGeometry({4}, 0), ConfigError);
}

TEST_CASE("flux quantization rounds to the nearest allowed fraction") {
  auto [n, f] = quantize_flux(1.0 / 3.0, 60);
  CHECK(n == 20);
  CHECK(f == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  auto [n2, f2] = quantize_flux(22.0 / 140.0, 60);
  CHECK(n2 == 9);
  CHECK(f2 == doctest::Approx(0.15));
  TorusGeometry g({4, 6}, 1);
  FluxMatrix fl(g);
  CHECK_THROWS_AS(fl.set(0, 1, 1), FluxNotQuantized);  // unequal sizes
  CHECK_THROWS_AS(fl.set(0, 0, 1), ConfigError);
  TorusGeometry gs({6, 6}, 1);
  FluxMatrix fls(gs);
  fls.set(0, 1, 2);
  CHECK(fls.phi(0, 1) == doctest::Approx(2.0 * pi / 3.0));
  CHECK(fls.phi(1, 0) == doctest::Approx(-2.0 * pi / 3.0));
  CHECK(fls.fraction(0, 1) == doctest::Approx(1.0 / 3.0));
  CHECK_FALSE(fls.is_zero());
}

TEST_CASE("smallest torus reproduces the doubled-bond spectrum") {
  // M = 2 aliases +e and -e hops onto the same bond: eigenvalues of the free
  // square lattice become 2 cos k1 + 2 cos k2 with k in {0, pi}
  TorusGeometry g({2, 2}, 1);
  FiniteOperator H = build_hamiltonian(hofstadter(0.0), g, FluxMatrix(g));
  EigenSystem es = eigh(H);
  CHECK(es.eps[0] == doctest::Approx(-4.0).epsilon(1e-14));
  CHECK(es.eps[1] == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(es.eps[2] == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(es.eps[3] == doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("bipartite symmetry survives the magnetic phases") {
  TorusGeometry g({6, 6}, 1);
  FluxMatrix fl(g);
  fl.set(0, 1, 1);
  EigenSystem es = eigh(build_hamiltonian(hofstadter(0.0), g, fl));
  const long n = es.eps.size();
  for (long a = 0; a < n; ++a)
    CHECK(es.eps[a] == doctest::Approx(-es.eps[n - 1 - a]).epsilon(1e-12));
}

TEST_CASE("hopping range beyond half the torus is rejected") {
  HoppingModel far;
  far.d = 1;
  far.N = 1;
  far.channels = 1;
  Mat one = Mat::Constant(1, 1, 1.0);
  far.hops.push_back({{2}, [one](const LocalView&) { return one; }});
  TorusGeometry g3({3}, 1);
  CHECK_THROWS_AS(build_hamiltonian(far, g3, FluxMatrix(g3)), RangeTooLarge);
  TorusGeometry g4({4}, 1);  // 2*range == M aliases but stays well defined
  CHECK_NOTHROW(build_hamiltonian(far, g4, FluxMatrix(g4)));
}

TEST_CASE("derivation acts diagonally on the dual shifts") {
  TorusGeometry g({5, 5}, 1);
  FluxMatrix fl(g);
  fl.set(0, 1, 1);
  FiniteOperator u1 = magnetic_shift(g, fl, {1, 0});
  FiniteOperator u2 = magnetic_shift(g, fl, {0, 1});
  CHECK(max_abs(approximate_derivation(u1, 0).A + I1 * u1.A) < 1e-14);
  CHECK(max_abs(approximate_derivation(u1, 1).A) == 0.0);
  CHECK(max_abs(approximate_derivation(u2, 1).A + I1 * u2.A) < 1e-14);
  // Leibniz on a product of shifts
  FiniteOperator u12{g, u1.A * u2.A, false};
  Mat lhs = approximate_derivation(u12, 0).A;
  Mat rhs = approximate_derivation(u1, 0).A * u2.A + u1.A * approximate_derivation(u2, 0).A;
  CHECK(max_abs(lhs - rhs) < 1e-13);
}

TEST_CASE("derivations annihilate the normalized trace exactly") {
  TorusGeometry g({4, 3}, 2);
  FiniteOperator A{g, random_mat(g.dim(), 11), false};
  for (int j = 0; j < 2; ++j)
    CHECK(normalized_trace(approximate_derivation(A, j)) == cplx(0.0, 0.0));
  // integration by parts holds when every wrap window is sign-symmetric
  TorusGeometry go({5, 3}, 1);
  FiniteOperator B{go, random_mat(go.dim(), 12), false};
  FiniteOperator C{go, random_mat(go.dim(), 13), false};
  for (int j = 0; j < 2; ++j) {
    cplx lhs = normalized_trace(FiniteOperator{go, B.A * Mat(approximate_derivation(C, j).A), false});
    cplx rhs = normalized_trace(FiniteOperator{go, Mat(approximate_derivation(B, j).A) * C.A, false});
    CHECK(std::abs(lhs + rhs) < 1e-12);
  }
}

TEST_CASE("trace per volume is cyclic and normalized") {
  TorusGeometry g({3, 3}, 2);
  CHECK(normalized_trace(FiniteOperator::identity(g)) == cplx(1.0, 0.0));
  Mat A = random_mat(g.dim(), 3), B = random_mat(g.dim(), 4);
  cplx tab = normalized_trace(FiniteOperator{g, A * B, false});
  cplx tba = normalized_trace(FiniteOperator{g, B * A, false});
  CHECK(std::abs(tab - tba) < 1e-13);
}

TEST_CASE("root-of-unity derivation equals the wrapped form on odd tori") {
  TorusGeometry g({5, 3}, 1);
  FiniteOperator A{g, random_mat(g.dim(), 7), false};
  for (int j = 0; j < 2; ++j)
    CHECK(max_abs(derivation_root_of_unity(A, j).A - approximate_derivation(A, j).A) < 1e-12);
  TorusGeometry ge({4, 3}, 1);
  FiniteOperator Ae{ge, random_mat(ge.dim(), 8), false};
  CHECK_THROWS_AS(derivation_root_of_unity(Ae, 0), Unsupported);
  CHECK_NOTHROW(derivation_root_of_unity(Ae, 1));
}

TEST_CASE("magnetic shifts realize the rotation algebra") {
  TorusGeometry g({6, 6}, 1);
  FluxMatrix fl(g);
  fl.set(0, 1, 2);
  FiniteOperator u1 = magnetic_shift(g, fl, {1, 0});
  FiniteOperator u2 = magnetic_shift(g, fl, {0, 1});
  cplx ph = std::exp(I1 * fl.phi(0, 1));
  CHECK(max_abs(u1.A * u2.A - ph * u2.A * u1.A) < 1e-13);
  Mat p1 = Mat::Identity(g.dim(), g.dim()), p2 = p1;
  for (int k = 0; k < 6; ++k) {
    p1 = (u1.A * p1).eval();
    p2 = (u2.A * p2).eval();
  }
  CHECK(max_abs(p1 - Mat::Identity(g.dim(), g.dim())) < 1e-12);
  CHECK(max_abs(p2 - Mat::Identity(g.dim(), g.dim())) < 1e-12);
}

TEST_CASE("dual translations commute with every magnetic shift") {
  TorusGeometry g({4, 4}, 1);
  FluxMatrix fl(g);
  fl.set(0, 1, 1);
  for (std::vector<int> y : {std::vector<int>{1, 0}, {0, 1}, {2, 3}}) {
    FiniteOperator u1 = magnetic_shift(g, fl, {1, 0});
    FiniteOperator u2 = magnetic_shift(g, fl, {0, 1});
    // V_y u V_y^{-1} = u for the generators: conjugation leaves them fixed
    CHECK(max_abs(apply_magnetic_translation(u1, y, fl).A - u1.A) < 1e-12);
    CHECK(max_abs(apply_magnetic_translation(u2, y, fl).A - u2.A) < 1e-12);
  }
}

TEST_CASE("assembled Hamiltonians are covariant under dual translations") {
  TorusGeometry g({4, 4}, 1);
  FluxMatrix fl(g);
  fl.set(0, 1, 1);
  HoppingModel model = hofstadter(1.7);
  DisorderConfig cfg = sample_config(42, 0, g.cells(), model.channels);
  FiniteOperator H = build_hamiltonian(model, g, fl, cfg);
  for (std::vector<int> y : {std::vector<int>{1, 0}, {0, 1}, {3, 2}}) {
    FiniteOperator Ht = apply_magnetic_translation(H, y, fl);
    FiniteOperator Hs = build_hamiltonian(model, g, fl, cfg.shifted(y, g));
    CHECK(max_abs(Ht.A - Hs.A) < 1e-12);
  }
}

TEST_CASE("flux numerators are periodic mod the torus size") {
  TorusGeometry g({5, 5}, 1);
  FluxMatrix a(g), b(g);
  a.set(0, 1, 2);
  b.set(0, 1, 2 + 5);
  Mat Ha = build_hamiltonian(hofstadter(0.0), g, a).A;
  Mat Hb = build_hamiltonian(hofstadter(0.0), g, b).A;
  CHECK(max_abs(Ha - Hb) < 1e-12);
}

TEST_CASE("disorder streams are deterministic and counter-seeded") {
  DisorderConfig a = sample_config(99, 3, 50, 2);
  DisorderConfig b = sample_config(99, 3, 50, 2);
  CHECK(a.w == b.w);
  DisorderConfig c = sample_config(99, 4, 50, 2);
  CHECK(a.w != c.w);
  DisorderConfig d = sample_config(100, 3, 50, 2);
  CHECK(a.w != d.w);
  // uniform on [-1/2, 1/2): moments of a long stream
  DisorderConfig big = sample_config(7, 0, 200000, 1);
  double m1 = 0.0, m2 = 0.0;
  for (double v : big.w) {
    CHECK(v >= -0.5);
    CHECK(v < 0.5);
    m1 += v;
    m2 += v * v;
  }
  m1 /= big.w.size();
  m2 /= big.w.size();
  CHECK(std::abs(m1) < 3e-3);
  CHECK(std::abs(m2 - 1.0 / 12.0) < 1e-3);
}

TEST_CASE("disorder shift permutes cells the way the translation does") {
  TorusGeometry g({3, 4}, 1);
  DisorderConfig cfg = sample_config(5, 0, g.cells(), 2);
  DisorderConfig sh = cfg.shifted({1, 2}, g);
  for (long c = 0; c < g.cells(); ++c) {
    auto x = g.cell_coords(c);
    std::vector<int> src{(x[0] - 1 + 3) % 3, (x[1] - 2 + 4) % 4};
    for (int ch = 0; ch < 2; ++ch) CHECK(sh.at(c, ch) == cfg.at(g.cell_index(src), ch));
  }
}

TEST_CASE("operator dumps round-trip bit for bit") {
  TorusGeometry g({3, 2}, 2);
  FiniteOperator A{g, random_mat(g.dim(), 21), false};
  std::string path = "test_lattice_dump.bin";
  dump_operator(A, path);
  FiniteOperator B = load_operator(path);
  std::remove(path.c_str());
  CHECK(B.geo == g);
  CHECK(max_abs(A.A - B.A) == 0.0);
}
