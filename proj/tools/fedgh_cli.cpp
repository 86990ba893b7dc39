// Command-line runner for federated simulations with optional gradient harmonization.
//
//   fedgh run <config.json> [--out DIR] [--seed-override N] [--quiet]
//   fedgh conflict-probe <config.json> [--out DIR] [--seed-override N] [--quiet]
//
// Exit codes: 0 success, 1 every cell failed, 2 configuration error.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fedgh/config.hpp"
#include "fedgh/error.hpp"
#include "fedgh/experiment.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed_override;
  bool quiet = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("config", args.config_path, "Run configuration (JSON)")->required();
  cmd->add_option("--out", args.out_dir, "Output directory (overrides output_dir in the config)");
  cmd->add_option("--seed-override", args.seed_override, "Run a single seed instead of the configured list");
  cmd->add_flag("--quiet", args.quiet, "Suppress progress and summary output");
}

int execute(const CommonArgs& args, fedgh::RunMode mode) {
  fedgh::ExperimentConfig cfg;
  try {
    cfg = fedgh::load_config(args.config_path);
  } catch (const fedgh::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  fedgh::RunOptions options;
  if (!args.out_dir.empty()) options.out_dir = args.out_dir;
  options.seed_override = args.seed_override;
  options.quiet = args.quiet;
  options.mode = mode;
  try {
    return fedgh::run_experiment(cfg, options, std::cout).exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated learning simulator with server-side gradient harmonization"};
  app.require_subcommand(1);

  CommonArgs run_args;
  auto* run = app.add_subcommand("run", "Run every (strategy, seed) cell and print a comparison table");
  add_common(run, run_args);

  CommonArgs probe_args;
  auto* probe = app.add_subcommand("conflict-probe", "Train the first strategy and dump per-round similarity snapshots");
  add_common(probe, probe_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (*run) return execute(run_args, fedgh::RunMode::compare);
  return execute(probe_args, fedgh::RunMode::probe);
}
