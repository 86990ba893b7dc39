#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "fedgh/paramvec.hpp"

namespace fedgh {

/// Per-client update directions recovered on the server, plus the snapshot taken
/// at construction. All projection targets come from the snapshot; it is shared
/// between copies of the set and cannot be modified.
class GradientSet {
 public:
  GradientSet(std::vector<std::size_t> client_ids, std::vector<ParamVector> gradients, double eta);

  std::size_t size() const noexcept { return client_ids_.size(); }
  const std::vector<std::size_t>& client_ids() const noexcept { return client_ids_; }
  double eta() const noexcept { return eta_; }

  std::vector<ParamVector>& gradients() noexcept { return gradients_; }
  const std::vector<ParamVector>& gradients() const noexcept { return gradients_; }
  const std::vector<ParamVector>& frozen() const noexcept { return *frozen_; }

 private:
  std::vector<std::size_t> client_ids_;
  std::vector<ParamVector> gradients_;
  std::shared_ptr<const std::vector<ParamVector>> frozen_;
  double eta_;
};

struct ConflictPair {
  std::size_t client_i = 0;  // client ids, client_i < client_j
  std::size_t client_j = 0;
  double dot = 0.0;
};

struct PairSimilarity {
  std::size_t client_i = 0;
  std::size_t client_j = 0;
  double similarity = 0.0;
};

struct ConflictReport {
  std::vector<std::size_t> client_ids;
  std::vector<double> similarity;  // row-major |S| x |S|, positions follow client_ids
  std::vector<ConflictPair> conflict_pairs;
  double conflict_ratio = 0.0;
  double min_similarity = 0.0;
  std::size_t projections_applied = 0;
  std::vector<std::size_t> projections_per_client;  // same positions as client_ids

  std::size_t size() const noexcept { return client_ids.size(); }
  double similarity_at(std::size_t pos_i, std::size_t pos_j) const { return similarity.at(pos_i * size() + pos_j); }

  /// Upper-triangle pairs sorted by ascending similarity (ties by client ids).
  std::vector<PairSimilarity> sorted_pairs() const;
};

/// g_k = (w_k - global_w) / eta, positions aligned with client_ids.
GradientSet recover_gradients(const ParamVector& global_w, const std::vector<ParamVector>& client_params,
                              std::vector<std::size_t> client_ids, double eta);

/// Pairwise cosine similarities of the frozen (pre-harmonization) gradients. A pair conflicts when
/// its dot product is strictly negative. Fewer than two clients gives an empty report.
ConflictReport measure_conflicts(const GradientSet& gs);

/// One applied projection, reported to an optional observer (used by tests).
struct ProjectionEvent {
  std::size_t position = 0;        // k, the gradient being modified
  std::size_t target_position = 0; // j
  const ParamVector& before;
  const ParamVector& after;
  const ParamVector& target;
};

using ProjectionObserver = std::function<void(const ProjectionEvent&)>;

struct HarmonizeResult {
  GradientSet gradients;
  ConflictReport report;  // pre-harmonization statistics plus projection counts
};

/// Gradient harmonization. Clients are visited in position order; for client k the
/// other clients are visited in a permutation seeded by (order_seed, client id) and
/// whenever dot(g_k, frozen_j) < 0 with a nonzero target, g_k is replaced by
/// project_out(g_k, frozen_j). Projections accumulate on g_k; targets always come
/// from the frozen snapshot.
HarmonizeResult harmonize(const GradientSet& gs, std::uint64_t order_seed, const ProjectionObserver& observer = {});

/// w_k = global_w + eta * g_k
std::vector<ParamVector> rebuild_models(const GradientSet& gs, const ParamVector& global_w);

}  // namespace fedgh
