#include "fedgh/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fedgh/error.hpp"
#include "fedgh/rng.hpp"

namespace fedgh {

void LocalConfig::validate() const {
  if (epochs == 0) throw ContractError("local.epochs must be >= 1");
  if (batch_size == 0) throw ContractError("local.batch_size must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ContractError("local.learning_rate must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ContractError("local.momentum must be in [0, 1)");
  if (!(prox_mu >= 0.0) || !std::isfinite(prox_mu)) throw ContractError("local.prox_mu must be >= 0");
}

ClientResult client_update(const ModelSpec& spec, const ParamVector& global_w, const Batch& data,
                           std::span<const std::size_t> indices, const LocalConfig& cfg, const ClientStream& stream) {
  cfg.validate();
  if (indices.empty()) throw ContractError("client_update: client " + std::to_string(stream.client_id) + " has no samples");

  Rng rng(derive_seed(stream.seed, Stream::client, {stream.round, stream.client_id}));
  std::vector<std::size_t> order(indices.begin(), indices.end());

  ClientResult result;
  result.client_id = stream.client_id;
  result.n_k = indices.size();
  ParamVector w = global_w;
  ParamVector velocity(w.size());
  const bool use_momentum = cfg.momentum > 0.0;

  auto diverged = [&](const char* what) {
    return DivergenceError("client " + std::to_string(stream.client_id) + " diverged at local step " +
                           std::to_string(result.tau_k) + " (" + what + ")");
  };

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      const Batch batch = data.gather(std::span<const std::size_t>(order).subspan(start, stop - start));
      auto [loss, grad] = loss_and_grad(spec, w, batch);
      if (!std::isfinite(loss)) throw diverged("non-finite loss");
      if (cfg.prox_mu > 0.0) {
        for (std::size_t i = 0; i < w.size(); ++i) grad[i] += cfg.prox_mu * (w[i] - global_w[i]);
      }
      if (use_momentum) {
        for (std::size_t i = 0; i < w.size(); ++i) {
          velocity[i] = cfg.momentum * velocity[i] - cfg.learning_rate * grad[i];
          w[i] += velocity[i];
        }
      } else {
        for (std::size_t i = 0; i < w.size(); ++i) w[i] -= cfg.learning_rate * grad[i];
      }
      ++result.tau_k;
      if (!w.all_finite()) throw diverged("non-finite parameters");
      epoch_loss += loss * static_cast<double>(stop - start);
    }
    result.local_loss_trace.push_back(epoch_loss / static_cast<double>(order.size()));
  }
  result.final_params = std::move(w);
  return result;
}

}  // namespace fedgh
