#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fedgh/config.hpp"
#include "fedgh/metrics.hpp"
#include "fedgh/server.hpp"

namespace fedgh {

/// Data, partition and model for one (strategy, seed) cell. Everything random is
/// keyed by the seed alone, so every strategy of a sweep sees the same clients.
FederatedSetup build_setup(const ExperimentConfig& cfg, const StrategyConfig& strategy, std::uint64_t seed);

enum class RunMode {
  compare,  // metrics.csv, config.json and the final-round snapshot per cell, then a summary table
  probe,    // first strategy only, one similarity snapshot per round
};

struct RunOptions {
  std::optional<std::filesystem::path> out_dir;  // overrides cfg.output_dir
  std::optional<std::uint64_t> seed_override;    // replaces cfg.seeds
  bool quiet = false;
  RunMode mode = RunMode::compare;
};

struct CellOutcome {
  std::string strategy;
  std::uint64_t seed = 0;
  std::filesystem::path dir;
  bool ok = false;
  std::string error;
  std::vector<RoundRecord> history;
};

struct ExperimentSummary {
  std::vector<CellOutcome> cells;
  int exit_code = 0;  // 0 when any cell completed, 1 when all failed
};

/// Cell directory: <out>/run_<seed> for a single strategy, <out>/<name>/run_<seed> otherwise.
std::filesystem::path cell_dir(const ExperimentConfig& cfg, const std::filesystem::path& out,
                               const StrategyConfig& strategy, std::uint64_t seed);

/// Runs every (strategy, seed) cell and writes its artifacts. A failing cell is
/// logged to <out>/failures.log and does not stop the others.
ExperimentSummary run_experiment(const ExperimentConfig& cfg, const RunOptions& options, std::ostream& log);

/// Per strategy: final test accuracy (or loss, for the quadratic model) mean +- sd over
/// completed seeds, and the mean conflict ratio over all rounds.
std::string format_summary(const ExperimentConfig& cfg, const ExperimentSummary& summary);

}  // namespace fedgh
