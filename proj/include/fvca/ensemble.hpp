#pragma once

#include <atomic>
#include <chrono>
#include <mutex>
#include <thread>

#include "hamiltonian.hpp"
#include "spectral.hpp"

namespace fvca {

struct EnsembleSpec {
  HoppingModel model;
  TorusGeometry geo;
  FluxMatrix flux;
  std::uint64_t master_seed = 0;
  int config_count = 1;
};

inline DisorderConfig sample_config(const EnsembleSpec& spec, long index) {
  if (index < 0 || index >= spec.config_count) throw ConfigError("config index out of range");
  return sample_config(spec.master_seed, (std::uint64_t)index, spec.geo.cells(), spec.model.channels);
}

// Everything a per-config task may need; the eigensystem is computed lazily
// so chiral fast paths can skip the full diagonalization.
struct ConfigContext {
  const EnsembleSpec* spec = nullptr;
  long index = 0;
  DisorderConfig cfg;
  FiniteOperator H;
  mutable std::optional<EigenSystem> es_;
  const EigenSystem& es() const {
    if (!es_) es_ = eigh(H);
    return *es_;
  }
};

using EnsembleTask = std::function<std::vector<double>(const ConfigContext&)>;

struct EnsembleStats {
  double mean = 0.0, stddev = 0.0, stderr_mean = 0.0;
  std::vector<double> raw;  // per-config values in index order
};

// Map configs to workers (atomic work index), reduce single-threaded in
// config-index order so the output is bit-identical for any worker count.
inline std::vector<std::vector<EnsembleStats>> run_ensemble(const EnsembleSpec& spec,
                                                            const std::vector<EnsembleTask>& tasks,
                                                            int workers = 1, bool progress = true) {
  const int nc = spec.config_count;
  std::vector<std::vector<std::vector<double>>> results(nc);  // [config][task][slot]
  std::vector<std::exception_ptr> failures(nc);
  std::atomic<long> next{0};
  std::mutex io;
  auto worker = [&]() {
    for (;;) {
      long idx = next.fetch_add(1);
      if (idx >= nc) return;
      auto t0 = std::chrono::steady_clock::now();
      try {
        ConfigContext ctx;
        ctx.spec = &spec;
        ctx.index = idx;
        ctx.cfg = sample_config(spec, idx);
        ctx.H = build_hamiltonian(spec.model, spec.geo, spec.flux, ctx.cfg);
        std::vector<std::vector<double>> vals;
        for (const auto& t : tasks) vals.push_back(t(ctx));
        results[idx] = std::move(vals);
      } catch (...) {
        failures[idx] = std::current_exception();
      }
      if (progress) {
        double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::lock_guard<std::mutex> lk(io);
        std::fprintf(stderr, "config %ld done in %.2fs\n", idx, dt);
      }
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (int i = 0; i < nc; ++i)
    if (failures[i]) std::rethrow_exception(failures[i]);

  std::vector<std::vector<EnsembleStats>> out(tasks.size());
  for (size_t t = 0; t < tasks.size(); ++t) {
    size_t slots = results.empty() ? 0 : results[0][t].size();
    out[t].resize(slots);
    for (size_t s = 0; s < slots; ++s) {
      EnsembleStats& st = out[t][s];
      for (int i = 0; i < nc; ++i) st.raw.push_back(results[i][t][s]);
      for (double v : st.raw) st.mean += v;
      st.mean /= (double)nc;
      if (nc > 1) {
        double ss = 0.0;
        for (double v : st.raw) ss += (v - st.mean) * (v - st.mean);
        st.stddev = std::sqrt(ss / (double)(nc - 1));
        st.stderr_mean = st.stddev / std::sqrt((double)nc);
      }
    }
  }
  return out;
}

}  // namespace fvca
