#include "fedgh/harmonizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fedgh/error.hpp"
#include "fedgh/rng.hpp"

namespace fedgh {

GradientSet::GradientSet(std::vector<std::size_t> client_ids, std::vector<ParamVector> gradients, double eta)
    : client_ids_(std::move(client_ids)),
      gradients_(std::move(gradients)),
      frozen_(std::make_shared<const std::vector<ParamVector>>(gradients_)),
      eta_(eta) {
  if (!(eta_ > 0.0)) throw ContractError("GradientSet: eta must be > 0");
  if (client_ids_.size() != gradients_.size()) throw ContractError("GradientSet: ids and gradients differ in count");
  for (const auto& g : gradients_) {
    if (g.size() != gradients_.front().size()) throw ContractError("GradientSet: gradients differ in length");
  }
}

std::vector<PairSimilarity> ConflictReport::sorted_pairs() const {
  std::vector<PairSimilarity> pairs;
  const std::size_t n = size();
  pairs.reserve(n * (n > 0 ? n - 1 : 0) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) pairs.push_back({client_ids[i], client_ids[j], similarity_at(i, j)});
  }
  std::sort(pairs.begin(), pairs.end(), [](const PairSimilarity& a, const PairSimilarity& b) {
    if (a.similarity != b.similarity) return a.similarity < b.similarity;
    if (a.client_i != b.client_i) return a.client_i < b.client_i;
    return a.client_j < b.client_j;
  });
  return pairs;
}

GradientSet recover_gradients(const ParamVector& global_w, const std::vector<ParamVector>& client_params,
                              std::vector<std::size_t> client_ids, double eta) {
  if (!(eta > 0.0)) throw ContractError("recover_gradients: eta must be > 0");
  if (client_params.size() != client_ids.size()) throw ContractError("recover_gradients: ids and params differ in count");
  std::vector<ParamVector> grads;
  grads.reserve(client_params.size());
  const double inv_eta = 1.0 / eta;
  for (const auto& wk : client_params) grads.push_back(scale(inv_eta, sub(wk, global_w)));
  return GradientSet(std::move(client_ids), std::move(grads), eta);
}

ConflictReport measure_conflicts(const GradientSet& gs) {
  ConflictReport report;
  const std::size_t n = gs.size();
  report.client_ids = gs.client_ids();
  report.projections_per_client.assign(n, 0);
  report.similarity.assign(n * n, 0.0);
  if (n < 2) return report;

  const auto& g = gs.frozen();
  std::vector<double> norms(n);
  for (std::size_t i = 0; i < n; ++i) norms[i] = norm(g[i]);

  report.min_similarity = 1.0;
  std::size_t conflicts = 0;
  for (std::size_t i = 0; i < n; ++i) {
    report.similarity[i * n + i] = norms[i] > 0.0 ? 1.0 : 0.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = dot(g[i], g[j]);
      double cos = 0.0;
      if (norms[i] > 0.0 && norms[j] > 0.0) cos = std::clamp(d / (norms[i] * norms[j]), -1.0, 1.0);
      report.similarity[i * n + j] = cos;
      report.similarity[j * n + i] = cos;
      report.min_similarity = std::min(report.min_similarity, cos);
      if (d < 0.0) {
        ++conflicts;
        report.conflict_pairs.push_back({gs.client_ids()[i], gs.client_ids()[j], d});
      }
    }
  }
  report.conflict_ratio = static_cast<double>(conflicts) / static_cast<double>(n * (n - 1) / 2);
  return report;
}

HarmonizeResult harmonize(const GradientSet& gs, std::uint64_t order_seed, const ProjectionObserver& observer) {
  HarmonizeResult out{gs, measure_conflicts(gs)};
  const std::size_t n = gs.size();
  const auto& frozen = gs.frozen();
  auto& grads = out.gradients.gradients();

  std::vector<double> frozen_sq(n);
  for (std::size_t j = 0; j < n; ++j) frozen_sq[j] = squared_norm(frozen[j]);

  std::vector<std::size_t> others;
  for (std::size_t k = 0; k < n; ++k) {
    others.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != k) others.push_back(j);
    }
    Rng rng(derive_seed(order_seed, {gs.client_ids()[k]}));
    std::shuffle(others.begin(), others.end(), rng);

    for (std::size_t j : others) {
      if (frozen_sq[j] == 0.0) continue;
      if (!(dot(grads[k], frozen[j]) < 0.0)) continue;
      ParamVector projected = project_out(grads[k], frozen[j]);
      if (observer) observer(ProjectionEvent{k, j, grads[k], projected, frozen[j]});
      grads[k] = std::move(projected);
      ++out.report.projections_per_client[k];
      ++out.report.projections_applied;
    }
  }
  return out;
}

std::vector<ParamVector> rebuild_models(const GradientSet& gs, const ParamVector& global_w) {
  std::vector<ParamVector> out;
  out.reserve(gs.size());
  for (const auto& g : gs.gradients()) out.push_back(axpy(gs.eta(), g, global_w));
  return out;
}

}  // namespace fedgh
