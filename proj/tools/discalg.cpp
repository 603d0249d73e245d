// discalg: hypothesis checks, psh certificates, hull probes and density
// experiments for the algebra generated by z and h + R on the closed disc.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "discalg/pipeline.hpp"

namespace {

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::logic_error&) {
      used = 0;
    }
    if (used != item.size()) throw discalg::ConfigError("bad number '" + item + "' in list");
    out.push_back(v);
  }
  return out;
}

bool write_file(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) return false;
  os << text;
  return static_cast<bool>(os);
}

// One CSV per target; with several targets the index goes before the extension.
std::string csv_path(const std::string& base, std::size_t k, std::size_t count) {
  if (count == 1) return base;
  const auto dot = base.find_last_of('.');
  const auto slash = base.find_last_of('/');
  const bool has_ext = dot != std::string::npos && (slash == std::string::npos || dot > slash);
  const std::string suffix = "_" + std::to_string(k);
  return has_ext ? base.substr(0, dot) + suffix + base.substr(dot) : base + suffix;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Checks and experiments for the uniform algebra [z, h+R] on the closed unit disc"};
  app.set_help_flag("--help", "Print this help message and exit");

  discalg::RunConfig cfg;
  std::string command, grid = "64x256", approx_grid = "128x512", psh_grid = "32x128", w_grid = "8x32";
  std::string radii = "0.5,0.9,0.99", method = "least-squares", json_path, csv_base;
  std::vector<std::string> targets;

  app.add_option("command", command, "check | psh | hull | approx")
      ->required()
      ->check(CLI::IsMember({"check", "psh", "hull", "approx"}));
  app.add_option("--h", cfg.h, "Harmonic part h(z)")->required();
  app.add_option("--R", cfg.R, "Perturbation R(z)")->required();
  app.add_option("--C", cfg.C, "Constant C in (0,1)")->required();
  app.add_option("--grid", grid, "Disc grid NRxNT for hypotheses and the hull")->capture_default_str();
  app.add_option("--approx-grid", approx_grid, "Disc grid NRxNT for density fits")->capture_default_str();
  app.add_option("--psh-grid", psh_grid, "z-grid NRxNT of the Levi certificates")->capture_default_str();
  app.add_option("--w-grid", w_grid, "w-grid RADIIxANGLES of the Levi certificates")->capture_default_str();
  app.add_option("--r", radii, "Comma-separated dilations r in (0,1)")->capture_default_str();
  app.add_option("--dmax", cfg.dmax, "Maximum total degree of the fits")->capture_default_str();
  app.add_option("--target", targets, "Target expression (repeatable)");
  app.add_option("--method", method, "least-squares | lawson")->capture_default_str();
  app.add_option("--tau", cfg.tau, "Near-critical tolerance on |df/dzbar|")->capture_default_str();
  app.add_option("--seed", cfg.seed, "Seed for all random sampling")->capture_default_str();
  app.add_option("--json", json_path, "Write the JSON report here");
  app.add_option("--csv", csv_base, "Write density curves here (approx)");
  app.add_flag("--timings", cfg.timings, "Record wall-clock time per stage in the report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  discalg::CommandOutput out;
  try {
    cfg.grid = discalg::parse_grid_size(grid);
    cfg.approx_grid = discalg::parse_grid_size(approx_grid);
    cfg.psh_grid = discalg::parse_grid_size(psh_grid);
    cfg.w_grid = discalg::parse_grid_size(w_grid);
    cfg.radii = parse_list(radii);
    cfg.method = discalg::parse_method(method);
    if (!targets.empty()) cfg.targets = targets;
    out = discalg::run_command(command, cfg);
  } catch (const discalg::ParseError& e) {
    std::cerr << "discalg: " << e.what() << '\n';
    if (!json_path.empty()) {
      discalg::json err{{"schema", discalg::schema_version},
                        {"command", command},
                        {"error", {{"kind", "parse"}, {"offset", e.offset()}, {"expected", e.expected()}, {"found", e.found()}}},
                        {"exit", 2}};
      write_file(json_path, err.dump(2) + "\n");
    }
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "discalg: " << e.what() << '\n';
    if (!json_path.empty()) {
      discalg::json err{{"schema", discalg::schema_version},
                        {"command", command},
                        {"error", {{"kind", "config"}, {"message", e.what()}}},
                        {"exit", 2}};
      write_file(json_path, err.dump(2) + "\n");
    }
    return 2;
  }

  if (!json_path.empty() && !write_file(json_path, out.report.dump(2) + "\n")) {
    std::cerr << "discalg: cannot write " << json_path << '\n';
    return 2;
  }
  if (!csv_base.empty()) {
    for (std::size_t k = 0; k < out.curves.size(); ++k) {
      const std::string path = csv_path(csv_base, k, out.curves.size());
      if (!write_file(path, discalg::to_csv(out.curves[k]))) {
        std::cerr << "discalg: cannot write " << path << '\n';
        return 2;
      }
    }
  }
  if (json_path.empty()) std::cout << out.report.dump(2) << '\n';
  return out.exit_code;
}
