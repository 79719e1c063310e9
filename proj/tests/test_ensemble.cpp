#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fvca/fvca.hpp>

using namespace fvca;

namespace {

EnsembleSpec chain_spec(double m0, double W1, double W2, int cells, int configs,
                        std::uint64_t seed) {
  EnsembleSpec s;
  s.model = aiii_chain(m0, W1, W2);
  s.geo = TorusGeometry({cells}, s.model.N);
  s.flux = FluxMatrix(s.geo);
  s.master_seed = seed;
  s.config_count = configs;
  return s;
}

}  // namespace

TEST_CASE("ensemble runs are deterministic and worker-count independent") {
  EnsembleSpec spec = chain_spec(0.5, 0.4, 0.8, 16, 6, 2024);
  EnsembleTask winding = [](const ConfigContext& ctx) {
    return std::vector<double>{aiii_chain_winding(0.5, 0.4, 0.8, ctx.cfg)};
  };
  EnsembleTask gap = [](const ConfigContext& ctx) {
    const EigenSystem& es = ctx.es();
    long h = es.eps.size() / 2;
    return std::vector<double>{es.eps[h] - es.eps[h - 1]};
  };
  auto a = run_ensemble(spec, {winding, gap}, 1, false);
  auto b = run_ensemble(spec, {winding, gap}, 1, false);
  auto c = run_ensemble(spec, {winding, gap}, 4, false);
  REQUIRE(a.size() == 2);
  REQUIRE(a[0].size() == 1);
  REQUIRE((int)a[0][0].raw.size() == 6);
  CHECK(a[0][0].raw == b[0][0].raw);  // bitwise
  CHECK(a[0][0].raw == c[0][0].raw);  // reduction order fixed by config index
  CHECK(a[1][0].raw == c[1][0].raw);
  CHECK(a[0][0].mean == c[0][0].mean);
}

TEST_CASE("clean ensembles have zero scatter") {
  // 64 cells: the clean finite-size deviation from 1 is below roundoff
  EnsembleSpec spec = chain_spec(0.5, 0.0, 0.0, 64, 4, 9);
  EnsembleTask winding = [](const ConfigContext& ctx) {
    return std::vector<double>{aiii_chain_winding(0.5, 0.0, 0.0, ctx.cfg)};
  };
  auto st = run_ensemble(spec, {winding}, 2, false);
  CHECK(st[0][0].stddev == 0.0);
  CHECK(st[0][0].stderr_mean == 0.0);
  CHECK(st[0][0].mean == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("per-config failures surface as the original exception") {
  EnsembleSpec spec = chain_spec(0.5, 0.4, 0.8, 16, 3, 1);
  EnsembleTask boom = [](const ConfigContext& ctx) -> std::vector<double> {
    if (ctx.index == 1) throw GapClosed("synthetic failure");
    return {0.0};
  };
  CHECK_THROWS_AS(run_ensemble(spec, {boom}, 2, false), GapClosed);
}

TEST_CASE("config index out of range is rejected") {
  EnsembleSpec spec = chain_spec(0.5, 0.4, 0.8, 16, 3, 1);
  CHECK_THROWS_AS(sample_config(spec, 3), ConfigError);
  CHECK_THROWS_AS(sample_config(spec, -1), ConfigError);
  CHECK_NOTHROW(sample_config(spec, 2));
}

TEST_CASE("standard error of the mean scales as one over sqrt(configs)") {
  auto stderr_of = [&](int nc) {
    EnsembleSpec spec = chain_spec(0.5, 0.4, 0.8, 4, nc, 77);
    EnsembleTask probe = [](const ConfigContext& ctx) {
      return std::vector<double>{ctx.cfg.at(0, 0)};
    };
    return run_ensemble(spec, {probe}, 1, false)[0][0].stderr_mean;
  };
  double s1 = stderr_of(256), s2 = stderr_of(1024);
  double slope = std::log(s2 / s1) / std::log(1024.0 / 256.0);
  CHECK(std::abs(slope + 0.5) < 0.05);
}
