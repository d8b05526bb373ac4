#include "tracefem/benchmark.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

namespace {

enum ExitCode { ok = 0, config_error = 2, solver_failure = 3, geometry_failure = 4 };

}  // namespace

int main(int argc, char** argv) {
  using namespace tracefem;
  CLI::App app{"Adaptive trace finite elements for the Laplace-Beltrami problem on the unit sphere"};
  app.require_subcommand(1);
  auto* cmd = app.add_subcommand("run", "run a convergence study and write one CSV row per cycle");

  RunConfig cfg;
  std::string stab = "nv", mode = "adaptive";
  std::optional<double> sigma;
  bool quiet = false;
  cmd->add_option("--degree", cfg.degree, "polynomial degree")->check(CLI::IsMember({1, 2}));
  cmd->add_option("--stab", stab, "stabilization")->check(CLI::IsMember({"nv", "jf"}));
  cmd->add_option("--lambda", cfg.lambda, "regularity exponent of the exact solution, in (0, 1]");
  cmd->add_option("--theta", cfg.theta, "bulk marking fraction, in (0, 1)");
  cmd->add_option("--mode", mode, "refinement mode")->check(CLI::IsMember({"uniform", "adaptive"}));
  cmd->add_option("--cycles", cfg.cycles, "number of solve/refine cycles");
  cmd->add_option("--rho-scale", cfg.stab.rho_scale, "normal-gradient stabilization scale (rho = scale / h)");
  cmd->add_option("--sigma", sigma, "face-jump stabilization parameters (all four set equal)");
  cmd->add_option("--n0", cfg.n0, "initial cells per axis");
  cmd->add_option("--rel-tol", cfg.solver.rel_tol, "CG relative tolerance");
  cmd->add_option("--max-iter", cfg.solver.max_iter, "CG iteration limit");
  cmd->add_option("--out", cfg.out_path, "CSV output path")->required();
  cmd->add_option("--vtk-dir", cfg.vtk_dir, "write one legacy VTK file per cycle into this directory");
  cmd->add_flag("--quiet", quiet, "do not echo rows to stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? ok : config_error;
  }

  try {
    cfg.stab.kind = parse_stabilization(stab);
    cfg.mode = mode == "uniform" ? RefinementMode::uniform : RefinementMode::adaptive;
    if (sigma) cfg.stab.sigma_F = cfg.stab.sigma_Gamma = cfg.stab.sigma_F_tilde = cfg.stab.sigma_Gamma_tilde = *sigma;
    if (!quiet) std::cout << csv_header() << '\n';
    run(cfg, [&](const CycleView& v) {
      if (!quiet) std::cout << csv_row(v.record) << std::endl;
    });
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return config_error;
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return solver_failure;
  } catch (const GeometryError& e) {
    std::cerr << "geometry failure: " << e.what() << '\n';
    return geometry_failure;
  } catch (const std::domain_error& e) {
    std::cerr << "geometry failure: " << e.what() << '\n';
    return geometry_failure;
  }
  return ok;
}
