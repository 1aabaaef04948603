#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "qp/commands.hpp"
#include "qp/config.hpp"
#include "qp/errors.hpp"
#include "qp/verify.hpp"

namespace {

int error_exit(const qp::Error& e) {
  std::cerr << "qp: " << qp::to_string(e.kind()) << ": " << e.what() << '\n';
  switch (e.kind()) {
    case qp::ErrorKind::ConfigError:
    case qp::ErrorKind::IoError:
      return 2;
    case qp::ErrorKind::NonConvergent:
    case qp::ErrorKind::ContourHit:
    case qp::ErrorKind::NoRoot:
    case qp::ErrorKind::NotUnique:
    case qp::ErrorKind::OverlapDetected:
    case qp::ErrorKind::DimensionCap:
      return 3;
    default:
      return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral computations for two-dimensional quasi-periodic Schroedinger operators"};
  app.require_subcommand(1);

  std::string config, out;
  int level = 1, grid = 0;
  double lambda = 0.0, k = 0.0, phi = 0.0;
  std::vector<int> only;
  bool no_timing = false;
  std::vector<std::string> diff;

  auto* verify = app.add_subcommand("verify", "Run the acceptance checks and print one JSON line per check");
  verify->add_option("--config", config, "Configuration file");
  verify->add_option("--only", only, "Run only these check ids");
  verify->add_flag("--no-timing", no_timing, "Omit runtimes so reports compare byte for byte");
  verify->add_option("--out", out, "Also write the report to this file");
  verify->add_option("--diff", diff, "Compare two report or CSV files, ignoring runtimes")->expected(2);

  auto* curve = app.add_subcommand("curve", "Trace an isoenergetic curve to CSV");
  curve->add_option("--config", config, "Configuration file")->required();
  curve->add_option("--level", level, "Level 1 or 2")->check(CLI::IsMember({1, 2}));
  curve->add_option("--lambda", lambda, "Energy")->required();
  curve->add_option("--grid", grid, "Number of angles (default from the config)");
  curve->add_option("--out", out, "Output CSV")->required();

  auto* regions = app.add_subcommand("regions", "Build the region map at (k, phi) as JSON");
  regions->add_option("--config", config, "Configuration file")->required();
  regions->add_option("--k", k, "Momentum radius")->required();
  regions->add_option("--phi", phi, "Base angle")->required();
  regions->add_option("--out", out, "Output JSON")->required();

  auto* eigen = app.add_subcommand("eigen", "Series eigenvalue with its oracle comparison");
  eigen->add_option("--config", config, "Configuration file")->required();
  eigen->add_option("--level", level, "Level 1 or 2")->check(CLI::IsMember({1, 2}));
  eigen->add_option("--k", k, "Momentum radius")->required();
  eigen->add_option("--phi", phi, "Angle")->required();
  eigen->add_option("--out", out, "Output JSON (default stdout)");

  auto* wave = app.add_subcommand("wavefunction", "Sample an approximate eigenfunction to CSV");
  wave->add_option("--config", config, "Configuration file")->required();
  wave->add_option("--level", level, "Level 1 or 2")->check(CLI::IsMember({1, 2}));
  wave->add_option("--k", k, "Momentum radius")->required();
  wave->add_option("--phi", phi, "Angle")->required();
  wave->add_option("--grid", grid, "Grid points per axis (default from the config)");
  wave->add_option("--out", out, "Output CSV")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (verify->parsed() && !diff.empty()) {
      const auto d = qp::diff_outputs(diff[0], diff[1]);
      for (const auto& line : d.differences) std::cout << line << '\n';
      std::cout << (d.identical ? "identical" : "different") << '\n';
      return d.identical ? 0 : 1;
    }
    if (config.empty()) {
      std::cerr << "qp: --config is required\n";
      return 2;
    }
    const auto cfg = qp::load_config(config);

    if (verify->parsed()) {
      qp::VerifyOptions opts;
      opts.only = only;
      opts.timing = !no_timing;
      std::ofstream file;
      if (!out.empty()) {
        file.open(out);
        if (!file) throw qp::IoError("cannot open " + out);
      }
      const auto records = qp::run_verify(cfg, opts, std::cout, [&](const qp::CheckRecord& r) {
        if (file) file << qp::to_json_line(r, opts.timing) << '\n';
      });
      return qp::exit_code(records);
    }
    if (curve->parsed()) {
      qp::run_curve(cfg, level, lambda, grid > 0 ? grid : cfg.phi_grid, out);
    } else if (regions->parsed()) {
      qp::run_regions(cfg, k, phi, out);
    } else if (eigen->parsed()) {
      const auto js = qp::run_eigen(cfg, level, k, phi);
      if (out.empty()) {
        std::cout << js << '\n';
      } else {
        std::ofstream f(out);
        if (!(f << js << '\n')) throw qp::IoError("cannot write " + out);
      }
    } else if (wave->parsed()) {
      qp::run_wavefunction(cfg, level, k, phi, grid > 0 ? grid : cfg.verify.eigenfunction_grid, out);
    }
  } catch (const qp::Error& e) {
    return error_exit(e);
  }
  return 0;
}
