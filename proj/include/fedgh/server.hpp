#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fedgh/datagen.hpp"
#include "fedgh/metrics.hpp"
#include "fedgh/models.hpp"
#include "fedgh/trainer.hpp"

namespace fedgh {

enum class Aggregator { fedavg, fednova };

const char* to_string(Aggregator a) noexcept;

struct StrategyConfig {
  std::string name = "fedavg";
  Aggregator aggregator = Aggregator::fedavg;
  bool harmonize = false;
  double client_fraction = 1.0;
  std::size_t rounds = 1;
  std::optional<double> prox_mu;  // overrides LocalConfig::prox_mu when set

  void validate(std::size_t num_clients) const;
};

/// max(1, round_half_up(fraction * num_clients)), capped at num_clients.
std::size_t sample_size(std::size_t num_clients, double fraction);

/// Uniform draw without replacement, keyed by (seed, round), sorted ascending.
std::vector<std::size_t> sample_clients(std::size_t num_clients, double fraction, std::size_t round,
                                        std::uint64_t seed);

/// Sum of (n_k / n) w_k with n summed over the given results only.
ParamVector aggregate_fedavg(std::span<const ClientResult> results, const ParamVector& global_w);

/// global_w + tau_eff * sum p_k (w_k - global_w) / tau_k, with p_k = n_k / n and tau_eff = sum p_k tau_k.
ParamVector aggregate_fednova(std::span<const ClientResult> results, const ParamVector& global_w);

/// Everything a run needs besides the evolving global state.
struct FederatedSetup {
  ModelSpec model;
  SyntheticDataset train;
  SyntheticDataset test;
  Partition partition;
  LocalConfig local;
  StrategyConfig strategy;
  std::uint64_t seed = 0;
  std::size_t threads = 1;     // concurrent client updates within a round
  bool record_timing = false;  // wall_ms stays 0 unless set, keeping metrics reproducible

  LocalConfig effective_local() const;
  void validate() const;
};

struct GlobalState {
  std::size_t round = 0;  // completed rounds
  ParamVector global_w;
  std::vector<RoundRecord> history;
};

GlobalState initial_state(const FederatedSetup& setup);

/// One communication round: sample, train locally, recover gradients and measure
/// conflicts, optionally harmonize, aggregate, evaluate on the test split. The record
/// is appended to state.history and returned. Client divergence is rethrown as a
/// DivergenceError carrying the round number.
RoundRecord run_round(GlobalState& state, const FederatedSetup& setup);

/// Runs strategy.rounds rounds from initial_state.
GlobalState run_rounds(const FederatedSetup& setup);

}  // namespace fedgh
