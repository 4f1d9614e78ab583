// stefan-spde: simulate the stochastic Stefan system with transport noise,
// verify the pathwise estimates on recorded runs, run Galerkin convergence
// sweeps, and dump diagnostics of the noise covariance field.

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "stefan/errors.hpp"
#include "stefan/runner.hpp"

namespace {

int env_threads() {
  const char* v = std::getenv("STEFAN_SPDE_THREADS");
  if (!v) return 0;
  const int t = std::atoi(v);
  return t > 0 ? t : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stefan-spde: spectral Galerkin solver for a stochastic Stefan problem "
               "with mushy region and turbulent transport noise"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", run_dir;
  long long seed_override = -1;
  int threads = env_threads();

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    if (needs_config)
      sub->add_option("--config", config_path, "flat key=value config file")->required();
    sub->add_option("--threads", threads, "worker threads (default: hardware, or "
                                          "STEFAN_SPDE_THREADS)");
  };

  CLI::App* sim = app.add_subcommand("simulate", "integrate and record trajectories");
  add_common(sim, true);
  sim->add_option("--out", out_dir, "output directory")->required();
  sim->add_option("--seed", seed_override, "override the config seed");

  CLI::App* ver = app.add_subcommand("verify", "run every estimate check on a recorded run");
  add_common(ver, false);
  ver->add_option("--out", run_dir, "run directory produced by simulate")->required();

  CLI::App* con = app.add_subcommand("converge", "Galerkin Cauchy-difference sweep");
  add_common(con, true);
  con->add_option("--out", out_dir, "output directory")->required();
  con->add_option("--seed", seed_override, "override the config seed");

  CLI::App* qr = app.add_subcommand("qreport", "noise covariance diagnostics");
  add_common(qr, true);
  qr->add_option("--out", out_dir, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  stefan::RunnerOptions opt;
  opt.threads = threads;
  try {
    if (sim->parsed()) {
      stefan::ParsedConfig cfg = stefan::parse_config_file(config_path);
      if (seed_override >= 0) cfg.sim.seed = static_cast<std::uint64_t>(seed_override);
      return stefan::run_simulate(cfg, out_dir, opt);
    }
    if (ver->parsed()) return stefan::run_verify(run_dir, opt);
    if (con->parsed()) {
      stefan::ParsedConfig cfg = stefan::parse_config_file(config_path);
      if (seed_override >= 0) cfg.sim.seed = static_cast<std::uint64_t>(seed_override);
      return stefan::run_converge(cfg, out_dir, opt);
    }
    if (qr->parsed()) {
      stefan::ParsedConfig cfg = stefan::parse_config_file(config_path);
      return stefan::run_qreport(cfg, out_dir, opt);
    }
  } catch (const stefan::ConfigError& e) {
    std::cerr << "config rejected: " << e.what() << "\n";
    return stefan::kExitConfig;
  } catch (const stefan::RuntimeError& e) {
    std::cerr << "runtime failure: " << e.what() << "\n";
    return stefan::kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return stefan::kExitRuntime;
  }
  return 0;
}
