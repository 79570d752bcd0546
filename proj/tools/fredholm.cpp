// fredholm: command-line front end. Exit codes: 0 ok, 2 config error, 3 numerical failure.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fredholm/config.hpp"
#include "fredholm/harness.hpp"

namespace fs = std::filesystem;
using namespace fredholm;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Globals {
  std::string config;
  std::string out = "out";
  unsigned threads = 1;
  std::optional<std::string> rule;
  bool reproducible = false;
};

RunConfig load(const Globals& g) {
  if (g.config.empty()) throw ConfigError("--config is required for this subcommand");
  RunConfig cfg = load_run_config(g.config);
  if (g.rule) {
    cfg.disc.rule = parse_collocation_rule(*g.rule);
    cfg.disc.validate();
  }
  return cfg;
}

RunOptions options(const Globals& g) { return {std::max(1u, g.threads), g.reproducible}; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Collocation solver for second-kind Fredholm equations with discontinuous data"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "problem config (JSON)");
  app.add_option("--out", g.out, "output directory");
  app.add_option("--threads", g.threads, "assembly threads")->check(CLI::PositiveNumber);
  app.add_option("--collocation-rule", g.rule, "offset or nodes")->check(CLI::IsMember({"offset", "nodes"}));
  app.add_flag("--reproducible", g.reproducible, "write zero timings so reruns are byte-identical");

  auto* solve_cmd = app.add_subcommand("solve", "solve one problem; writes solution.csv and manifest.json");
  auto* conv_cmd = app.add_subcommand("convergence", "solve over a list of n_B; writes convergence.csv");
  std::vector<std::size_t> n_B_list;
  conv_cmd->add_option("--n-B", n_B_list, "node counts (default: config n_B_list)");
  auto* interp_cmd = app.add_subcommand("interp", "project the rhs onto the enriched basis; writes interp.csv");
  auto* gibbs_cmd = app.add_subcommand("gibbs", "enriched vs plain solve; writes gibbs.csv");
  auto* quad_cmd = app.add_subcommand("quad-check", "trapezoid error table; writes quadcheck.csv");
  auto* basis_cmd = app.add_subcommand("basis", "dump basis functions; writes basis.csv");
  int basis_m = 4;
  std::size_t basis_n = 16;
  std::string basis_preset = "circle";
  basis_cmd->add_option("--m", basis_m, "spline order")->check(CLI::Range(1, 4));
  basis_cmd->add_option("--n-B", basis_n, "node count");
  basis_cmd->add_option("--contour", basis_preset, "preset contour when no config is given");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    const fs::path out = g.out;
    if (*solve_cmd) {
      const auto a = run_solve(load(g), options(g));
      write_solve(a, out);
      const auto& m = a.manifest;
      std::cout << "n_B=" << m["n_B"] << " residual_inf=" << m["residual_inf"]
                << " max_grid_error=" << m["max_grid_error"] << '\n';
    } else if (*conv_cmd) {
      const auto rep = run_convergence(load(g), n_B_list, options(g));
      write_file(out / "convergence.csv", rep.csv());
      std::cout << rep.csv();
    } else if (*interp_cmd) {
      write_file(out / "interp.csv", run_interp(load(g)));
    } else if (*gibbs_cmd) {
      const auto rep = run_gibbs_demo(load(g), options(g));
      write_file(out / "gibbs.csv", rep.csv());
      std::cout << rep.csv();
    } else if (*quad_cmd) {
      write_file(out / "quadcheck.csv", run_quadcheck());
    } else if (*basis_cmd) {
      Contour contour(ConformalMap::preset(basis_preset));
      if (!g.config.empty()) contour = load(g).contour;
      write_file(out / "basis.csv", run_basis_dump(contour, basis_m, basis_n));
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return 0;
}
