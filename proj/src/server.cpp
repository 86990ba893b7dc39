#include "fedgh/server.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <thread>

#include "fedgh/error.hpp"
#include "fedgh/harmonizer.hpp"
#include "fedgh/rng.hpp"

namespace fedgh {
namespace {

double total_samples(std::span<const ClientResult> results) {
  double n = 0.0;
  for (const auto& r : results) n += static_cast<double>(r.n_k);
  if (n <= 0.0) throw ContractError("aggregate: total sample count is zero");
  return n;
}

// Runs fn(i) for i in [0, count) on up to `threads` workers. The first exception
// (lowest index) is rethrown after all workers finish.
template <typename Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn&& fn) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::jthread> pool;
  for (std::size_t t = 0; t < std::min(threads, count); ++t) pool.emplace_back(worker);
  pool.clear();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

const char* to_string(Aggregator a) noexcept {
  switch (a) {
    case Aggregator::fedavg: return "fedavg";
    case Aggregator::fednova: return "fednova";
  }
  return "unknown";
}

void StrategyConfig::validate(std::size_t num_clients) const {
  if (!(client_fraction > 0.0 && client_fraction <= 1.0)) {
    throw ContractError("strategy " + name + ": client_fraction must be in (0, 1]");
  }
  if (rounds == 0) throw ContractError("strategy " + name + ": rounds must be >= 1");
  if (harmonize && sample_size(num_clients, client_fraction) < 2) {
    throw ContractError("strategy " + name + ": harmonization needs at least 2 sampled clients per round");
  }
  if (prox_mu && !(*prox_mu >= 0.0)) throw ContractError("strategy " + name + ": prox_mu must be >= 0");
}

std::size_t sample_size(std::size_t num_clients, double fraction) {
  const auto m = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(num_clients) + 0.5));
  return std::clamp<std::size_t>(m, 1, std::max<std::size_t>(num_clients, 1));
}

std::vector<std::size_t> sample_clients(std::size_t num_clients, double fraction, std::size_t round,
                                        std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw ContractError("sample_clients: fraction must be in (0, 1]");
  if (num_clients == 0) throw ContractError("sample_clients: no clients");
  std::vector<std::size_t> ids(num_clients);
  std::iota(ids.begin(), ids.end(), 0);
  const std::size_t m = sample_size(num_clients, fraction);
  if (m == num_clients) return ids;
  Rng rng(derive_seed(seed, Stream::sampling, {round}));
  // Partial Fisher-Yates: the first m slots become a uniform sample.
  for (std::size_t i = 0; i < m; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, num_clients - 1);
    std::swap(ids[i], ids[pick(rng)]);
  }
  ids.resize(m);
  std::sort(ids.begin(), ids.end());
  return ids;
}

ParamVector aggregate_fedavg(std::span<const ClientResult> results, const ParamVector& global_w) {
  if (results.empty()) throw ContractError("aggregate_fedavg: no client results");
  const double n = total_samples(results);
  ParamVector out(global_w.size());
  for (const auto& r : results) axpy_inplace(static_cast<double>(r.n_k) / n, r.final_params, out);
  if (!out.all_finite()) throw ContractError("aggregate_fedavg: non-finite result");
  return out;
}

ParamVector aggregate_fednova(std::span<const ClientResult> results, const ParamVector& global_w) {
  if (results.empty()) throw ContractError("aggregate_fednova: no client results");
  const double n = total_samples(results);
  double tau_eff = 0.0;
  ParamVector direction(global_w.size());
  for (const auto& r : results) {
    if (r.tau_k == 0) throw ContractError("aggregate_fednova: client " + std::to_string(r.client_id) + " has tau_k = 0");
    const double p = static_cast<double>(r.n_k) / n;
    tau_eff += p * static_cast<double>(r.tau_k);
    axpy_inplace(p / static_cast<double>(r.tau_k), sub(r.final_params, global_w), direction);
  }
  return axpy(tau_eff, direction, global_w);
}

LocalConfig FederatedSetup::effective_local() const {
  LocalConfig cfg = local;
  if (strategy.prox_mu) cfg.prox_mu = *strategy.prox_mu;
  return cfg;
}

void FederatedSetup::validate() const {
  model.validate();
  effective_local().validate();
  strategy.validate(partition.num_clients());
  if (partition.num_clients() == 0) throw ContractError("setup: partition has no clients");
  if (train.dim() != model.input_dim || test.dim() != model.input_dim) {
    throw ContractError("setup: dataset dimension does not match the model");
  }
  if (test.size() == 0) throw ContractError("setup: empty test split");
}

GlobalState initial_state(const FederatedSetup& setup) {
  setup.validate();
  GlobalState s;
  s.global_w = init_params(setup.model, setup.seed);
  return s;
}

RoundRecord run_round(GlobalState& state, const FederatedSetup& setup) {
  const auto started = std::chrono::steady_clock::now();
  const std::size_t t = state.round + 1;
  const LocalConfig local = setup.effective_local();
  const auto ids = sample_clients(setup.partition.num_clients(), setup.strategy.client_fraction, t, setup.seed);

  std::vector<ClientResult> results(ids.size());
  try {
    parallel_for(ids.size(), setup.threads, [&](std::size_t i) {
      const auto& indices = setup.partition.assignments[ids[i]];
      results[i] = client_update(setup.model, state.global_w, setup.train.samples, indices, local,
                                 ClientStream{setup.seed, t, ids[i]});
    });
  } catch (const DivergenceError& e) {
    throw DivergenceError("round " + std::to_string(t) + ": " + e.what());
  }

  std::vector<ParamVector> params;
  params.reserve(results.size());
  for (const auto& r : results) params.push_back(r.final_params);
  const GradientSet gs = recover_gradients(state.global_w, params, ids, local.learning_rate);

  ConflictReport report;
  if (setup.strategy.harmonize) {
    auto harmonized = harmonize(gs, derive_seed(setup.seed, Stream::order, {t}));
    report = std::move(harmonized.report);
    auto rebuilt = rebuild_models(harmonized.gradients, state.global_w);
    // Untouched clients keep their uploaded parameters exactly.
    for (std::size_t i = 0; i < results.size(); ++i) {
      if (report.projections_per_client[i] > 0) results[i].final_params = std::move(rebuilt[i]);
    }
  } else {
    report = measure_conflicts(gs);
  }

  state.global_w = setup.strategy.aggregator == Aggregator::fednova ? aggregate_fednova(results, state.global_w)
                                                                     : aggregate_fedavg(results, state.global_w);
  if (!state.global_w.all_finite()) throw DivergenceError("round " + std::to_string(t) + ": non-finite global model");

  RoundRecord rec;
  rec.round = t;
  rec.test_loss = evaluate_loss(setup.model, state.global_w, setup.test.samples);
  rec.test_accuracy = setup.model.is_classifier() ? accuracy(setup.model, state.global_w, setup.test.samples)
                                                  : std::numeric_limits<double>::quiet_NaN();
  rec.conflict_ratio = report.conflict_ratio;
  rec.min_similarity = report.min_similarity;
  rec.projections_applied = report.projections_applied;
  rec.conflicts = std::move(report);
  if (setup.record_timing) {
    rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  }
  state.round = t;
  state.history.push_back(rec);
  return rec;
}

GlobalState run_rounds(const FederatedSetup& setup) {
  GlobalState state = initial_state(setup);
  for (std::size_t r = 0; r < setup.strategy.rounds; ++r) run_round(state, setup);
  return state;
}

}  // namespace fedgh
