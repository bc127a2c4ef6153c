// mecmfg: analytic AoI evaluation, event-driven simulation, mean-field
// equilibrium solving and parameter sweeps for the priority-driven edge
// offloading model.
//
// Usage:
//   mecmfg <aoi|simulate|solve|sweep> --config cfg.json [--set k=v]...
//          [--out dir] [--jobs N] [--seed S]
//   mecmfg validate --config cfg.json [--set k=v]...
//
// Exit codes: 0 success, 2 config parse/validation error, 3 solver
// non-convergence (results still written). Set MECMFG_LOG=debug|info|warn|
// error|silent for verbosity.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mecmfg/experiment.hpp"
#include "mecmfg/version.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir = ".";
  int jobs = 0;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_run_options) {
  cmd->add_option("--config", args.config_path, "experiment config (or manifest) path")
      ->required();
  cmd->add_option("--set", args.overrides,
                  "override a config field, e.g. --set system.es_rate=12");
  if (with_run_options) {
    cmd->add_option("--out", args.out_dir, "output directory (results.csv, manifest.json)");
    cmd->add_option("--jobs", args.jobs, "worker pool size (default: hardware threads)");
    cmd->add_option("--seed", args.seed, "override the rng seed recorded in the manifest");
  }
}

int run_mode(mecmfg::cli::Mode mode, const CommonArgs& args) {
  mecmfg::cli::RunOptions options;
  options.mode = mode;
  options.overrides = args.overrides;
  options.out_dir = args.out_dir;
  options.jobs = args.jobs;
  options.seed = args.seed;
  const auto outcome = mecmfg::cli::run_experiment(args.config_path, options);
  return outcome.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  mecmfg::cli::set_log_level_from_env();

  CLI::App app{"priority-driven edge offloading: AoI analysis, simulation and "
               "mean-field equilibria"};
  app.set_version_flag("--version", mecmfg::kVersion);
  app.require_subcommand(1);

  CommonArgs aoi_args, sim_args, solve_args, sweep_args, validate_args;
  add_common(app.add_subcommand("aoi", "evaluate analytic AoI, power and cost"),
             aoi_args, true);
  add_common(app.add_subcommand("simulate", "run the discrete-event simulator"),
             sim_args, true);
  add_common(app.add_subcommand("solve", "compute the mean-field equilibrium"),
             solve_args, true);
  add_common(app.add_subcommand("sweep", "repeat a mode over a parameter grid"),
             sweep_args, true);
  add_common(app.add_subcommand("validate", "check a config without executing"),
             validate_args, false);

  CLI11_PARSE(app, argc, argv);

  if (app.got_subcommand("validate")) {
    const auto diagnostics = mecmfg::cli::validate_config_file(
        validate_args.config_path, validate_args.overrides);
    if (diagnostics.empty()) {
      std::cout << "valid\n";
      return 0;
    }
    for (const auto& diag : diagnostics) {
      std::cout << diag.path << ": " << diag.message << "\n";
    }
    return 2;
  }
  if (app.got_subcommand("aoi")) return run_mode(mecmfg::cli::Mode::Aoi, aoi_args);
  if (app.got_subcommand("simulate")) return run_mode(mecmfg::cli::Mode::Simulate, sim_args);
  if (app.got_subcommand("solve")) return run_mode(mecmfg::cli::Mode::Solve, solve_args);
  if (app.got_subcommand("sweep")) return run_mode(mecmfg::cli::Mode::Sweep, sweep_args);
  return 1;
}
