#pragma once

#include <ctime>
#include <filesystem>
#include <map>
#include <memory>

#include <json.hpp>

#include "bloch.hpp"
#include "csv.hpp"
#include "ensemble.hpp"
#include "observables.hpp"
#include "scaling.hpp"

namespace fvca {

using Json = nlohmann::ordered_json;

namespace detail {
inline void check_keys(const Json& o, std::initializer_list<const char*> allowed,
                       const std::string& where) {
  if (!o.is_object()) throw ConfigError(where + " must be an object");
  for (auto it = o.begin(); it != o.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) ok = true;
    if (!ok) throw ConfigError("unknown key '" + it.key() + "' in " + where);
  }
}
inline double jnum(const Json& o, const char* k) {
  if (!o.contains(k)) throw ConfigError(std::string("missing key '") + k + "'");
  if (!o[k].is_number()) throw ConfigError(std::string("'") + k + "' must be a number");
  return o[k].get<double>();
}
inline double jnum_or(const Json& o, const char* k, double dflt) {
  return o.contains(k) ? jnum(o, k) : dflt;
}
}  // namespace detail

inline HoppingModel make_model(const std::string& id, const std::map<std::string, double>& p) {
  auto need = [&](std::initializer_list<const char*> keys) {
    for (const char* k : keys)
      if (!p.count(k)) throw ConfigError("model " + id + " needs param '" + k + "'");
    if (p.size() != keys.size()) throw ConfigError("model " + id + " has an unknown param");
  };
  if (id == "hofstadter") {
    need({"lambda"});
    return hofstadter(p.at("lambda"));
  }
  if (id == "kane_mele_up") {
    need({"lambda"});
    return kane_mele_up(p.at("lambda"));
  }
  if (id == "aiii_chain") {
    need({"m", "W1", "W2"});
    return aiii_chain(p.at("m"), p.at("W1"), p.at("W2"));
  }
  if (id == "aiii_3d") {
    need({"m", "t", "lambda"});
    return aiii_3d(p.at("m"), p.at("t"), p.at("lambda"));
  }
  if (id == "clifford_dirac") {
    need({"d", "m", "class"});
    return clifford_dirac((int)p.at("d"), p.at("m"),
                          p.at("class") == 0.0 ? SymmetryClass::A : SymmetryClass::AIII);
  }
  if (id == "hofstadter_supercell") {
    need({"p", "q"});
    return hofstadter_supercell((int)p.at("p"), (int)p.at("q"));
  }
  throw ConfigError("unknown model id " + id);
}

struct RunConfig {
  std::string model_id;
  std::vector<std::pair<std::string, std::vector<double>>> params;  // singletons or sweeps
  std::vector<std::vector<int>> sizes;
  std::vector<double> flux_targets;
  std::vector<double> fermi_levels;
  double T = 0.1, Gamma = 0.1, p_exponent = 1.0;
  int config_count = 1;
  std::uint64_t master_seed = 0;
  std::vector<Json> tasks;
  std::string output = "out";
  Json echo;  // fully-resolved config (reproduces this run when fed back in)
};

inline RunConfig parse_config(const Json& j) {
  detail::check_keys(j, {"model", "geometry", "flux", "fermi_levels", "temperature", "gamma", "p",
                         "ensemble", "tasks", "output"},
                     "config");
  RunConfig c;
  if (!j.contains("model")) throw ConfigError("missing 'model'");
  detail::check_keys(j["model"], {"id", "params"}, "model");
  c.model_id = j["model"].at("id").get<std::string>();
  if (j["model"].contains("params"))
    for (auto it = j["model"]["params"].begin(); it != j["model"]["params"].end(); ++it) {
      std::vector<double> vals;
      if (it.value().is_array())
        for (const auto& v : it.value()) vals.push_back(v.get<double>());
      else
        vals.push_back(it.value().get<double>());
      if (vals.empty()) throw ConfigError("empty sweep for param " + it.key());
      c.params.emplace_back(it.key(), vals);
    }
  if (!j.contains("geometry")) throw ConfigError("missing 'geometry'");
  detail::check_keys(j["geometry"], {"sizes"}, "geometry");
  const Json& sz = j["geometry"].at("sizes");
  if (!sz.is_array() || sz.empty()) throw ConfigError("'sizes' must be a non-empty array");
  if (sz[0].is_array())
    for (const auto& s : sz) c.sizes.push_back(s.get<std::vector<int>>());
  else
    c.sizes.push_back(sz.get<std::vector<int>>());
  for (const auto& s : c.sizes)
    for (int M : s)
      if (M < 2) throw ConfigError("lattice sizes must be >= 2");
  if (j.contains("flux")) {
    detail::check_keys(j["flux"], {"targets"}, "flux");
    c.flux_targets = j["flux"].at("targets").get<std::vector<double>>();
  }
  if (c.flux_targets.empty()) c.flux_targets.push_back(0.0);
  if (j.contains("fermi_levels")) c.fermi_levels = j["fermi_levels"].get<std::vector<double>>();
  if (c.fermi_levels.empty()) c.fermi_levels.push_back(0.0);
  c.T = detail::jnum_or(j, "temperature", 0.1);
  c.Gamma = detail::jnum_or(j, "gamma", 0.1);
  c.p_exponent = detail::jnum_or(j, "p", 1.0);
  if (c.T <= 0.0) throw ConfigError("temperature must be positive");
  if (c.Gamma <= 0.0) throw ConfigError("gamma must be positive");
  if (j.contains("ensemble")) {
    detail::check_keys(j["ensemble"], {"configs", "master_seed"}, "ensemble");
    c.config_count = (int)detail::jnum_or(j["ensemble"], "configs", 1);
    c.master_seed = j["ensemble"].contains("master_seed")
                        ? j["ensemble"]["master_seed"].get<std::uint64_t>()
                        : 0;
  }
  if (c.config_count < 1) throw ConfigError("ensemble configs must be >= 1");
  if (!j.contains("tasks") || !j["tasks"].is_array() || j["tasks"].empty())
    throw ConfigError("'tasks' must be a non-empty array");
  for (const auto& t : j["tasks"]) {
    Json task = t.is_string() ? Json{{"type", t.get<std::string>()}} : t;
    if (!task.contains("type")) throw ConfigError("task without 'type'");
    std::string ty = task["type"].get<std::string>();
    static const std::vector<std::string> known = {"dos",       "kubo",   "chern",  "winding",
                                                   "ccc",       "loclength", "streda", "scaling"};
    if (std::find(known.begin(), known.end(), ty) == known.end())
      throw ConfigError("unknown task type " + ty);
    c.tasks.push_back(task);
  }
  if (j.contains("output")) c.output = j["output"].get<std::string>();

  // validate model construction and task options early (exit 2, not 3)
  {
    std::map<std::string, double> p0;
    for (const auto& [k, v] : c.params) p0[k] = v.front();
    HoppingModel m = make_model(c.model_id, p0);
    for (const auto& s : c.sizes)
      if ((int)s.size() != m.d) throw ConfigError("geometry dimension does not match model");
    for (const auto& t : c.tasks) {
      std::string ty = t["type"].get<std::string>();
      auto dirs_of = [&](std::initializer_list<const char*> keys) {
        detail::check_keys(t, keys, ty + " task");
        std::vector<int> dirs;
        if (t.contains("dirs"))
          dirs = t["dirs"].get<std::vector<int>>();
        else
          for (int d = 0; d < m.d; ++d) dirs.push_back(d);
        for (int d : dirs)
          if (d < 0 || d >= m.d) throw ConfigError(ty + " direction out of range");
        return dirs;
      };
      if (ty == "dos") {
        detail::check_keys(t, {"type", "grid", "delta"}, "dos task");
        if (detail::jnum_or(t, "delta", 0.05) <= 0.0) throw ConfigError("dos delta must be positive");
      } else if (ty == "kubo") {
        detail::check_keys(t, {"type", "i", "j"}, "kubo task");
        int di = (int)detail::jnum_or(t, "i", 0), dj = (int)detail::jnum_or(t, "j", 0);
        if (di < 0 || di >= m.d || dj < 0 || dj >= m.d)
          throw ConfigError("kubo direction out of range");
      } else if (ty == "chern") {
        if (dirs_of({"type", "dirs"}).size() % 2 != 0)
          throw ConfigError("chern needs an even direction list");
      } else if (ty == "winding") {
        if (dirs_of({"type", "dirs"}).size() % 2 != 1)
          throw ConfigError("winding needs an odd direction list");
        if (!m.chiral) throw ConfigError("winding needs a chiral model");
      } else if (ty == "ccc") {
        detail::check_keys(t, {"type", "grid", "r"}, "ccc task");
        if (detail::jnum_or(t, "r", 0.02) <= 0.0) throw ConfigError("ccc r must be positive");
      } else if (ty == "loclength") {
        detail::check_keys(t, {"type", "window"}, "loclength task");
        if (!t.contains("window")) throw ConfigError("loclength needs 'window' [lo, hi]");
        auto w = t["window"].get<std::vector<double>>();
        if (w.size() != 2 || w[0] >= w[1]) throw ConfigError("loclength window must be [lo, hi]");
      } else if (ty == "streda") {
        detail::check_keys(t, {"type", "n", "eps_F"}, "streda task");
        detail::jnum(t, "n");
        detail::jnum(t, "eps_F");
      } else if (ty == "scaling") {
        detail::check_keys(t, {"type", "input", "label_column", "x_column", "y_column",
                               "err_column", "mode", "ref_label", "exp_lo", "exp_hi"},
                           "scaling task");
        for (const char* k : {"input", "label_column", "x_column", "y_column", "mode"})
          if (!t.contains(k)) throw ConfigError(std::string("scaling needs '") + k + "'");
        std::string mode = t["mode"].get<std::string>();
        if (mode != "temperature" && mode != "size")
          throw ConfigError("scaling mode must be 'temperature' or 'size'");
        detail::jnum(t, "ref_label");
        if (detail::jnum(t, "exp_lo") >= detail::jnum(t, "exp_hi"))
          throw ConfigError("scaling exponent interval must be increasing");
      }
    }
  }

  // fully-resolved echo (defaults materialized)
  c.echo = Json{{"model", Json{{"id", c.model_id}, {"params", Json::object()}}},
                {"geometry", Json{{"sizes", c.sizes}}},
                {"flux", Json{{"targets", c.flux_targets}}},
                {"fermi_levels", c.fermi_levels},
                {"temperature", c.T},
                {"gamma", c.Gamma},
                {"p", c.p_exponent},
                {"ensemble", Json{{"configs", c.config_count}, {"master_seed", c.master_seed}}},
                {"tasks", c.tasks}};
  for (const auto& [k, v] : c.params)
    c.echo["model"]["params"][k] = v.size() == 1 ? Json(v.front()) : Json(v);
  return c;
}

// stable across output-dir and worker-count choices
inline std::uint64_t config_hash(const RunConfig& c) { return fnv1a(c.echo.dump()); }

namespace detail {
struct TaskFile {
  std::unique_ptr<CsvWriter> csv;
  std::vector<std::string> cols;
};

struct SweepPoint {
  std::vector<int> sizes;
  double flux_target = 0.0;
  int flux_n = 0;
  double flux_f = 0.0;
  std::vector<std::pair<std::string, double>> params;
};

inline std::vector<double> jgrid(const Json& t, const char* key, double lo, double hi, int n) {
  if (t.contains(key)) {
    auto g = t[key].get<std::vector<double>>();
    if (g.size() != 3) throw ConfigError(std::string(key) + " must be [min, max, points]");
    lo = g[0];
    hi = g[1];
    n = (int)g[2];
  }
  std::vector<double> out;
  for (int i = 0; i < n; ++i) out.push_back(lo + (hi - lo) * i / (n - 1));
  return out;
}
}  // namespace detail

// Execute all tasks; outputs CSVs plus manifest.json in out_dir.  Throws
// ConfigError for anything the schema should have caught, other errors for
// numeric failures (the CLI maps these to exit codes 2 and 3).
inline void run_tasks(const RunConfig& cfg, const std::string& out_dir, int workers) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const std::uint64_t hash = config_hash(cfg);

  {
    Json manifest{{"tool", "fvca"},
                  {"version", tool_version},
                  {"config_hash", format_g17((double)0)},  // replaced below
                  {"timestamp", (long long)std::time(nullptr)},
                  {"config", cfg.echo}};
    char hs[32];
    std::snprintf(hs, sizeof(hs), "%016llx", (unsigned long long)hash);
    manifest["config_hash"] = hs;
    Json resolved = Json::array();
    for (const auto& s : cfg.sizes)
      for (double ft : cfg.flux_targets) {
        auto [n, f] = quantize_flux(ft, s.size() > 1 ? s[1] : s[0]);
        resolved.push_back(Json{{"sizes", s}, {"target", ft}, {"n", n}, {"f", f}});
      }
    manifest["resolved_fluxes"] = resolved;
    std::ofstream mf(out_dir + "/manifest.json", std::ios::binary);
    mf << manifest.dump(2) << "\n";
  }

  // enumerate sweep points: size x flux x param grid
  std::vector<detail::SweepPoint> points;
  {
    std::vector<size_t> pidx(cfg.params.size(), 0);
    for (const auto& s : cfg.sizes)
      for (double ft : cfg.flux_targets) {
        std::fill(pidx.begin(), pidx.end(), 0);
        for (;;) {
          detail::SweepPoint sp;
          sp.sizes = s;
          sp.flux_target = ft;
          if (s.size() > 1) {
            auto [n, f] = quantize_flux(ft, s[1]);
            sp.flux_n = n;
            sp.flux_f = f;
          } else if (ft != 0.0) {
            throw ConfigError("flux is undefined in one dimension");
          }
          for (size_t k = 0; k < cfg.params.size(); ++k)
            sp.params.emplace_back(cfg.params[k].first, cfg.params[k].second[pidx[k]]);
          points.push_back(std::move(sp));
          size_t k = 0;
          for (; k < pidx.size(); ++k) {
            if (++pidx[k] < cfg.params[k].second.size()) break;
            pidx[k] = 0;
          }
          if (k == pidx.size()) break;
        }
      }
  }

  std::vector<std::string> prefix_cols;
  for (size_t d = 0; d < cfg.sizes[0].size(); ++d) prefix_cols.push_back("M" + std::to_string(d + 1));
  prefix_cols.push_back("flux_n");
  prefix_cols.push_back("flux_f");
  for (const auto& [k, v] : cfg.params) prefix_cols.push_back(k);

  std::map<std::string, int> name_count;
  std::vector<detail::TaskFile> files(cfg.tasks.size());
  auto open_csv = [&](size_t ti, const std::vector<std::string>& task_cols) {
    if (files[ti].csv) return;
    std::string ty = cfg.tasks[ti]["type"].get<std::string>();
    int n = ++name_count[ty];
    std::string fname = out_dir + "/" + ty + (n > 1 ? "_" + std::to_string(n) : "") + ".csv";
    std::vector<std::string> cols = ty == "scaling" ? task_cols : prefix_cols;
    if (ty != "scaling") cols.insert(cols.end(), task_cols.begin(), task_cols.end());
    files[ti].csv = std::make_unique<CsvWriter>(fname, cols, hash);
  };

  for (const auto& sp : points) {
    std::map<std::string, double> pmap(sp.params.begin(), sp.params.end());
    EnsembleSpec spec;
    spec.model = make_model(cfg.model_id, pmap);
    spec.geo = TorusGeometry(sp.sizes, spec.model.N);
    spec.flux = FluxMatrix(spec.geo);
    if (spec.geo.d > 1 && sp.flux_n != 0) spec.flux.set(0, 1, sp.flux_n);
    spec.master_seed = cfg.master_seed;
    spec.config_count = cfg.config_count;

    std::vector<double> prefix;
    for (int M : sp.sizes) prefix.push_back((double)M);
    prefix.push_back((double)sp.flux_n);
    prefix.push_back(sp.flux_f);
    for (const auto& [k, v] : sp.params) prefix.push_back(v);

    std::vector<EnsembleTask> etasks;
    std::vector<size_t> etask_owner;  // index into cfg.tasks
    std::vector<Json> etask_meta;
    for (size_t ti = 0; ti < cfg.tasks.size(); ++ti) {
      const Json& t = cfg.tasks[ti];
      std::string ty = t["type"].get<std::string>();
      if (ty == "dos") {
        detail::check_keys(t, {"type", "grid", "delta"}, "dos task");
        double delta = detail::jnum_or(t, "delta", 0.05);
        auto grid = detail::jgrid(t, "grid", -5.0, 5.0, 201);
        etasks.push_back([grid, delta](const ConfigContext& ctx) {
          return dos(ctx.es(), grid, delta).values;
        });
        etask_meta.push_back(Json{{"grid", grid}});
      } else if (ty == "kubo") {
        detail::check_keys(t, {"type", "i", "j"}, "kubo task");
        int di = (int)detail::jnum_or(t, "i", 0), dj = (int)detail::jnum_or(t, "j", 0);
        if (di < 0 || di >= spec.geo.d || dj < 0 || dj >= spec.geo.d)
          throw ConfigError("kubo direction out of range");
        double T = cfg.T, G = cfg.Gamma;
        auto eps = cfg.fermi_levels;
        etasks.push_back([di, dj, T, G, eps](const ConfigContext& ctx) {
          KuboSweep sw = kubo_sweep_prepare(ctx.H, ctx.es(), di, dj, G);
          std::vector<cplx> s = sw.eval(eps, T);
          std::vector<double> out;
          for (cplx v : s) {
            out.push_back(v.real());
            out.push_back(v.imag());
          }
          return out;
        });
        etask_meta.push_back(Json{{"i", di}, {"j", dj}});
      } else if (ty == "chern") {
        detail::check_keys(t, {"type", "dirs"}, "chern task");
        std::vector<int> dirs;
        if (t.contains("dirs"))
          dirs = t["dirs"].get<std::vector<int>>();
        else
          for (int d = 0; d < spec.geo.d; ++d) dirs.push_back(d);
        if (dirs.size() % 2 != 0) throw ConfigError("chern needs an even direction list");
        auto eps = cfg.fermi_levels;
        etasks.push_back([dirs, eps](const ConfigContext& ctx) {
          std::vector<double> out;
          for (double e : eps) out.push_back(chern_even(fermi_projection(ctx.es(), e), dirs));
          return out;
        });
        etask_meta.push_back(Json::object());
      } else if (ty == "winding") {
        detail::check_keys(t, {"type", "dirs"}, "winding task");
        std::vector<int> dirs;
        if (t.contains("dirs"))
          dirs = t["dirs"].get<std::vector<int>>();
        else
          for (int d = 0; d < spec.geo.d; ++d) dirs.push_back(d);
        if (dirs.size() % 2 != 1) throw ConfigError("winding needs an odd direction list");
        if (!spec.model.chiral) throw ConfigError("winding needs a chiral model");
        Mat J = *spec.model.chiral;
        etasks.push_back([dirs, J](const ConfigContext& ctx) {
          FermiUnitary fu;
          try {
            fu = fermi_unitary_chiral(ctx.H, J);
          } catch (const ChiralityViolation&) {
            fu = fermi_unitary_at_zero(ctx.es(), J);
          }
          return std::vector<double>{chern_odd(fu.U, dirs)};
        });
        etask_meta.push_back(Json::object());
      } else if (ty == "ccc") {
        detail::check_keys(t, {"type", "grid", "r"}, "ccc task");
        double r = detail::jnum_or(t, "r", 0.02);
        auto grid = detail::jgrid(t, "grid", -4.0, 4.0, 61);
        etasks.push_back([grid, r](const ConfigContext& ctx) {
          SpectralSurface s = ccc(ctx.H, ctx.es(), grid, r);
          std::vector<double> out;
          for (long a = 0; a < s.values.rows(); ++a)
            for (long b = 0; b < s.values.cols(); ++b) out.push_back(s.values(a, b));
          return out;
        });
        etask_meta.push_back(Json{{"grid", grid}});
      } else if (ty == "loclength") {
        detail::check_keys(t, {"type", "window"}, "loclength task");
        if (!t.contains("window")) throw ConfigError("loclength needs 'window' [lo, hi]");
        auto w = t["window"].get<std::vector<double>>();
        if (w.size() != 2 || w[0] >= w[1]) throw ConfigError("loclength window must be [lo, hi]");
        etasks.push_back([w](const ConfigContext& ctx) {
          return std::vector<double>{delta_loc_length(interval_projection(ctx.es(), w[0], w[1]))};
        });
        etask_meta.push_back(Json{{"window", w}});
      } else {
        etask_meta.push_back(Json::object());
        continue;  // streda and scaling run outside the ensemble
      }
      etask_owner.push_back(ti);
    }

    std::vector<std::vector<EnsembleStats>> stats;
    if (!etasks.empty()) stats = run_ensemble(spec, etasks, workers);

    for (size_t e = 0; e < etask_owner.size(); ++e) {
      size_t ti = etask_owner[e];
      std::string ty = cfg.tasks[ti]["type"].get<std::string>();
      const auto& st = stats[e];
      const Json& meta = etask_meta[ti];
      auto emit = [&](const std::vector<double>& tail) {
        std::vector<double> row = prefix;
        row.insert(row.end(), tail.begin(), tail.end());
        files[ti].csv->row(row);
      };
      if (ty == "dos") {
        open_csv(ti, {"eps", "value", "stderr", "configs"});
        auto grid = meta["grid"].get<std::vector<double>>();
        for (size_t g = 0; g < grid.size(); ++g)
          emit({grid[g], st[g].mean, st[g].stderr_mean, (double)cfg.config_count});
      } else if (ty == "kubo") {
        open_csv(ti, {"dir_i", "dir_j", "eps_F", "re_sigma", "im_sigma", "re_stderr", "im_stderr",
                      "configs"});
        for (size_t g = 0; g < cfg.fermi_levels.size(); ++g)
          emit({(double)meta["i"].get<int>(), (double)meta["j"].get<int>(), cfg.fermi_levels[g],
                st[2 * g].mean, st[2 * g + 1].mean, st[2 * g].stderr_mean, st[2 * g + 1].stderr_mean,
                (double)cfg.config_count});
      } else if (ty == "chern") {
        open_csv(ti, {"eps_F", "value", "stderr", "configs"});
        for (size_t g = 0; g < cfg.fermi_levels.size(); ++g)
          emit({cfg.fermi_levels[g], st[g].mean, st[g].stderr_mean, (double)cfg.config_count});
      } else if (ty == "winding") {
        open_csv(ti, {"value", "stderr", "configs"});
        emit({st[0].mean, st[0].stderr_mean, (double)cfg.config_count});
      } else if (ty == "ccc") {
        open_csv(ti, {"eps1", "eps2", "value", "stderr", "configs"});
        auto grid = meta["grid"].get<std::vector<double>>();
        for (size_t a = 0; a < grid.size(); ++a)
          for (size_t b = 0; b < grid.size(); ++b) {
            size_t g = a * grid.size() + b;
            emit({grid[a], grid[b], st[g].mean, st[g].stderr_mean, (double)cfg.config_count});
          }
      } else if (ty == "loclength") {
        open_csv(ti, {"lo", "hi", "value", "stderr", "configs"});
        auto w = meta["window"].get<std::vector<double>>();
        emit({w[0], w[1], st[0].mean, st[0].stderr_mean, (double)cfg.config_count});
      }
    }

    // single-shot (non-ensemble) tasks evaluated at this sweep point
    for (size_t ti = 0; ti < cfg.tasks.size(); ++ti) {
      const Json& t = cfg.tasks[ti];
      if (t["type"].get<std::string>() != "streda") continue;
      detail::check_keys(t, {"type", "n", "eps_F"}, "streda task");
      int n = (int)detail::jnum(t, "n");
      double eps_F = detail::jnum(t, "eps_F");
      StredaResult r = streda_check(spec.model, spec.geo, eps_F, n, n + 1);
      open_csv(ti, {"eps_F", "n", "slope", "chern", "configs"});
      std::vector<double> row = prefix;
      for (double v : {eps_F, (double)n, r.slope, r.chern, 1.0}) row.push_back(v);
      files[ti].csv->row(row);
    }
  }

  // post-processing tasks (run once, consume CSVs)
  for (size_t ti = 0; ti < cfg.tasks.size(); ++ti) {
    const Json& t = cfg.tasks[ti];
    if (t["type"].get<std::string>() != "scaling") continue;
    detail::check_keys(t, {"type", "input", "label_column", "x_column", "y_column", "err_column",
                           "mode", "ref_label", "exp_lo", "exp_hi"},
                       "scaling task");
    std::string input = t.at("input").get<std::string>();
    if (!std::filesystem::path(input).is_absolute()) input = out_dir + "/" + input;
    CsvTable tab = read_csv(input);
    int lc = tab.column(t.at("label_column").get<std::string>());
    int xc = tab.column(t.at("x_column").get<std::string>());
    int yc = tab.column(t.at("y_column").get<std::string>());
    int ec = t.contains("err_column") ? tab.column(t["err_column"].get<std::string>()) : -1;
    std::map<double, Curve> curves;
    for (const auto& r : tab.rows) {
      Curve& c = curves[r[lc]];
      c.label = r[lc];
      c.pts.push_back({r[xc], r[yc], ec >= 0 ? r[ec] : 0.0});
    }
    CurveFamily fam;
    for (auto& [l, c] : curves) {
      std::sort(c.pts.begin(), c.pts.end(),
                [](const CurvePoint& a, const CurvePoint& b) { return a.x < b.x; });
      fam.curves.push_back(std::move(c));
    }
    CrossingResult cr = crossing_point(fam);
    std::string mode = t.at("mode").get<std::string>();
    CollapseResult co = collapse_fit(
        fam, mode == "temperature" ? CollapseMode::temperature : CollapseMode::size,
        detail::jnum(t, "ref_label"), detail::jnum(t, "exp_lo"), detail::jnum(t, "exp_hi"));
    open_csv(ti, {"eps_c_cross", "spread", "pairs", "exponent", "eps_c_fit", "objective"});
    files[ti].csv->row({cr.eps_c, cr.spread, (double)cr.pairs_used, co.exponent, co.eps_c,
                        co.objective});
  }
}

// merge all task CSVs in a result dir with its manifest into one JSON
inline Json export_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::exists(dir + "/manifest.json")) throw MissingManifest("no manifest.json in " + dir);
  Json manifest;
  {
    std::ifstream mf(dir + "/manifest.json");
    mf >> manifest;
  }
  Json out{{"manifest", manifest}, {"tasks", Json::object()}};
  std::vector<std::string> paths;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".csv") paths.push_back(e.path().string());
  std::sort(paths.begin(), paths.end());
  for (const auto& p : paths) {
    CsvTable t = read_csv(p);
    Json jt{{"columns", t.columns}, {"rows", t.rows}};
    out["tasks"][fs::path(p).stem().string()] = jt;
  }
  return out;
}

}  // namespace fvca
