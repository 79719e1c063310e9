#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include <fvca/runner.hpp>

namespace {

int cmd_run(const std::string& config_path, int workers, const std::string& out_override) {
  fvca::RunConfig cfg;
  try {
    std::ifstream f(config_path);
    if (!f) {
      std::cerr << "error: cannot read " << config_path << "\n";
      return 2;
    }
    fvca::Json j = fvca::Json::parse(f);
    cfg = fvca::parse_config(j);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  std::string out = out_override.empty() ? cfg.output : out_override;
  try {
    fvca::run_tasks(cfg, out, workers);
  } catch (const fvca::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "run failed: " << e.what() << "\n";
    std::ofstream marker(out + "/FAILED", std::ios::binary);
    marker << e.what() << "\n";
    return 3;
  }
  return 0;
}

int cmd_export(const std::string& dir) {
  try {
    fvca::Json doc = fvca::export_dir(dir);
    std::ofstream f(dir + "/export.json", std::ios::binary);
    f << doc.dump(2) << "\n";
  } catch (const fvca::MissingManifest& e) {
    std::cerr << "export error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "export failed: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"covariant lattice Hamiltonians: spectra, transport, real-space invariants"};
  app.require_subcommand(1);

  int workers = 1;
  if (const char* w = std::getenv("FVCA_WORKERS")) workers = std::atoi(w);
  std::string out_override;
  if (const char* o = std::getenv("FVCA_OUT")) out_override = o;

  std::string config_path, export_dir;
  CLI::App* run = app.add_subcommand("run", "execute a JSON run config");
  run->add_option("config", config_path, "path to config.json")->required();
  run->add_option("--workers", workers, "worker thread count");
  run->add_option("--out", out_override, "output directory (overrides config)");

  CLI::App* exp = app.add_subcommand("export", "merge a result directory into one JSON");
  exp->add_option("dir", export_dir, "result directory")->required();

  CLI11_PARSE(app, argc, argv);
  if (run->parsed()) return cmd_run(config_path, std::max(1, workers), out_override);
  return cmd_export(export_dir);
}
