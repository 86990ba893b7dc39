#include "fedgh/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "fedgh/error.hpp"
#include "fedgh/rng.hpp"

namespace fedgh {
namespace {

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;
};

MeanSd mean_sd(const std::vector<double>& xs) {
  MeanSd m;
  if (xs.empty()) return m;
  for (double x : xs) m.mean += x;
  m.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - m.mean) * (x - m.mean);
    m.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return m;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string snapshot_name(std::size_t round) { return "sim_round" + std::to_string(round) + ".json"; }

void write_cell_config(const ExperimentConfig& cfg, const StrategyConfig& strategy, std::uint64_t seed,
                       const std::filesystem::path& dir) {
  nlohmann::json echo = to_json(cfg);
  echo["cell"] = {{"strategy", strategy.name}, {"seed", seed}};
  write_text_file(dir / "config.json", echo.dump(2) + "\n");
}

CellOutcome run_cell(const ExperimentConfig& cfg, const StrategyConfig& strategy, std::uint64_t seed,
                     const std::filesystem::path& dir, RunMode mode) {
  CellOutcome cell;
  cell.strategy = strategy.name;
  cell.seed = seed;
  cell.dir = dir;
  const FederatedSetup setup = build_setup(cfg, strategy, seed);
  GlobalState state = initial_state(setup);
  for (std::size_t r = 0; r < strategy.rounds; ++r) {
    const RoundRecord& rec = run_round(state, setup);
    if (mode == RunMode::probe && rec.conflicts.size() >= 2) {
      export_similarity_snapshot(rec.conflicts, rec.round, dir / snapshot_name(rec.round));
    }
  }
  if (mode == RunMode::compare) {
    export_csv(state.history, dir / "metrics.csv");
    write_cell_config(cfg, strategy, seed, dir);
    const RoundRecord& last = state.history.back();
    if (last.conflicts.size() >= 2) {
      export_similarity_snapshot(last.conflicts, last.round, dir / snapshot_name(last.round));
    }
  }
  cell.history = std::move(state.history);
  cell.ok = true;
  return cell;
}

}  // namespace

FederatedSetup build_setup(const ExperimentConfig& cfg, const StrategyConfig& strategy, std::uint64_t seed) {
  FederatedSetup setup;
  setup.model = cfg.model_spec();
  const auto full = generate_gaussian_mixture(cfg.data.num_classes, cfg.data.per_class, cfg.data.dim,
                                              cfg.data.separation, seed);
  auto [train, test] = split_holdout(full, cfg.data.test_fraction, seed);
  setup.train = std::move(train);
  setup.test = std::move(test);

  const std::uint64_t part_seed = derive_seed(seed, Stream::partition);
  switch (cfg.partition.scheme) {
    case PartitionScheme::dirichlet:
      setup.partition = partition_dirichlet(setup.train, cfg.partition.clients, cfg.partition.alpha, part_seed);
      break;
    case PartitionScheme::class_shard:
      setup.partition = partition_class_shard(setup.train, cfg.partition.clients, part_seed);
      break;
    case PartitionScheme::iid:
      setup.partition = partition_iid(setup.train, cfg.partition.clients, part_seed);
      break;
  }
  setup.local = cfg.local;
  setup.strategy = strategy;
  setup.seed = seed;
  setup.threads = cfg.threads;
  setup.record_timing = cfg.record_timing;
  setup.validate();
  return setup;
}

std::filesystem::path cell_dir(const ExperimentConfig& cfg, const std::filesystem::path& out,
                               const StrategyConfig& strategy, std::uint64_t seed) {
  const std::string run = "run_" + std::to_string(seed);
  return cfg.strategies.size() == 1 ? out / run : out / strategy.name / run;
}

ExperimentSummary run_experiment(const ExperimentConfig& cfg, const RunOptions& options, std::ostream& log) {
  const std::filesystem::path out = options.out_dir ? *options.out_dir : std::filesystem::path(cfg.output_dir);
  std::vector<std::uint64_t> seeds = cfg.seeds;
  if (options.seed_override) seeds = {*options.seed_override};
  std::vector<StrategyConfig> strategies = cfg.strategies;
  if (options.mode == RunMode::probe) strategies.resize(1);

  ExperimentSummary summary;
  std::string failures;
  for (const auto& strategy : strategies) {
    for (std::uint64_t seed : seeds) {
      const auto dir = options.mode == RunMode::probe ? out / ("run_" + std::to_string(seed))
                                                      : cell_dir(cfg, out, strategy, seed);
      try {
        summary.cells.push_back(run_cell(cfg, strategy, seed, dir, options.mode));
        if (!options.quiet) {
          const auto& last = summary.cells.back().history.back();
          log << "[" << strategy.name << " seed " << seed << "] " << last.round << " rounds, test_loss "
              << last.test_loss;
          if (!std::isnan(last.test_accuracy)) log << ", test_acc " << last.test_accuracy;
          log << "\n";
        }
      } catch (const std::exception& e) {
        CellOutcome failed;
        failed.strategy = strategy.name;
        failed.seed = seed;
        failed.dir = dir;
        failed.error = e.what();
        failures += strategy.name + " seed " + std::to_string(seed) + ": " + e.what() + "\n";
        if (!options.quiet) log << "[" << strategy.name << " seed " << seed << "] FAILED: " << e.what() << "\n";
        summary.cells.push_back(std::move(failed));
      }
    }
  }
  if (!failures.empty()) write_text_file(out / "failures.log", failures);

  bool any_ok = false;
  for (const auto& c : summary.cells) any_ok = any_ok || c.ok;
  summary.exit_code = any_ok ? 0 : 1;
  if (!options.quiet && options.mode == RunMode::compare) log << format_summary(cfg, summary);
  return summary;
}

std::string format_summary(const ExperimentConfig& cfg, const ExperimentSummary& summary) {
  const bool classifier = cfg.model.kind != ModelKind::quadratic;
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-20s %7s  %-22s %14s\n", "strategy", "cells",
                classifier ? "final test acc" : "final test loss", "conflict ratio");
  os << line;
  std::vector<std::string> order;
  for (const auto& c : summary.cells) {
    if (std::find(order.begin(), order.end(), c.strategy) == order.end()) order.push_back(c.strategy);
  }
  for (const auto& name : order) {
    std::vector<double> finals;
    std::vector<double> ratios;
    std::size_t total = 0;
    for (const auto& c : summary.cells) {
      if (c.strategy != name) continue;
      ++total;
      if (!c.ok) continue;
      const auto& last = c.history.back();
      finals.push_back(classifier ? last.test_accuracy : last.test_loss);
      double r = 0.0;
      for (const auto& rec : c.history) r += rec.conflict_ratio;
      ratios.push_back(r / static_cast<double>(c.history.size()));
    }
    const auto f = mean_sd(finals);
    const auto cr = mean_sd(ratios);
    const std::string cells = std::to_string(finals.size()) + "/" + std::to_string(total);
    const std::string acc = finals.empty() ? "-" : fixed(f.mean, 4) + " +- " + fixed(f.sd, 4);
    const std::string ratio = ratios.empty() ? "-" : fixed(cr.mean, 4);
    std::snprintf(line, sizeof line, "%-20s %7s  %-22s %14s\n", name.c_str(), cells.c_str(), acc.c_str(),
                  ratio.c_str());
    os << line;
  }
  return os.str();
}

}  // namespace fedgh
