#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fedgh/models.hpp"
#include "fedgh/paramvec.hpp"

namespace fedgh {

struct LocalConfig {
  std::size_t epochs = 5;
  std::size_t batch_size = 64;
  double learning_rate = 0.01;
  double momentum = 0.9;
  double prox_mu = 0.0;  // 0 disables the FedProx term

  void validate() const;
};

// Keys the client's shuffling stream.
struct ClientStream {
  std::uint64_t seed = 0;
  std::size_t round = 0;
  std::size_t client_id = 0;
};

struct ClientResult {
  std::size_t client_id = 0;
  ParamVector final_params;
  std::size_t n_k = 0;
  std::size_t tau_k = 0;  // local SGD steps, E * ceil(n_k / B)
  std::vector<double> local_loss_trace;  // mean minibatch loss per epoch
};

/// Local training of one client starting from the global model.
///
/// Each epoch reshuffles the client's indices and walks them in minibatches of
/// `batch_size`, keeping the trailing partial batch. With momentum the update is
/// v <- m v - lr g, w <- w + v, with v zeroed at the start of every call. A positive
/// prox_mu adds mu (w - global_w) to every minibatch gradient.
///
/// Throws DivergenceError when a loss or parameter becomes non-finite.
ClientResult client_update(const ModelSpec& spec, const ParamVector& global_w, const Batch& data,
                           std::span<const std::size_t> indices, const LocalConfig& cfg, const ClientStream& stream);

}  // namespace fedgh
