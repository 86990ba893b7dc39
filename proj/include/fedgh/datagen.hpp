#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "fedgh/models.hpp"
#include <json.hpp>

namespace fedgh {

/// Labeled samples drawn from one isotropic Gaussian per class.
struct SyntheticDataset {
  Batch samples;
  std::size_t num_classes = 0;
  // Generator metadata. Class means are in the raw (pre-standardization) space.
  std::vector<std::vector<double>> class_means;
  double separation = 0.0;
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return samples.rows(); }
  std::size_t dim() const noexcept { return samples.dim; }
  std::vector<std::vector<std::size_t>> indices_by_class() const;
};

/// Class c is centred at separation * u_c with u_c a seeded unit vector; noise is N(0, I).
/// Features are standardized per dimension across the whole dataset afterwards.
SyntheticDataset generate_gaussian_mixture(std::size_t num_classes, std::size_t per_class, std::size_t dim,
                                           double separation, std::uint64_t seed);

/// Moves round(fraction * count_c) samples of every class into a held-out set
/// (at least one, and never the last sample of a class). Returns {train, test}.
std::pair<SyntheticDataset, SyntheticDataset> split_holdout(const SyntheticDataset& ds, double fraction,
                                                            std::uint64_t seed);

enum class PartitionScheme { dirichlet, class_shard, iid };

const char* to_string(PartitionScheme scheme) noexcept;

inline constexpr double kIidAlpha = std::numeric_limits<double>::infinity();

struct Partition {
  std::vector<std::vector<std::size_t>> assignments;
  double alpha = kIidAlpha;
  PartitionScheme scheme = PartitionScheme::iid;

  std::size_t num_clients() const noexcept { return assignments.size(); }
  std::size_t n_k(std::size_t client) const { return assignments.at(client).size(); }
  std::size_t total_assigned() const noexcept;
};

/// Per class, proportions over clients ~ Dirichlet(alpha); counts by largest remainder.
/// alpha == kIidAlpha splits each class evenly instead. Redraws with seed + 1 while any
/// client is empty, up to 100 attempts, then throws PartitionError.
Partition partition_dirichlet(const SyntheticDataset& ds, std::size_t num_clients, double alpha,
                              std::uint64_t seed);

/// Shuffled classes sliced into num_clients groups; requires num_classes % num_clients == 0.
Partition partition_class_shard(const SyntheticDataset& ds, std::size_t num_clients, std::uint64_t seed);

/// Uniform shuffle split into near-equal shares.
Partition partition_iid(const SyntheticDataset& ds, std::size_t num_clients, std::uint64_t seed);

/// Shannon entropy (nats) of the label histogram over `indices`.
double label_entropy(const SyntheticDataset& ds, const std::vector<std::size_t>& indices);

nlohmann::json to_json(const Partition& p);
nlohmann::json describe(const SyntheticDataset& ds);

}  // namespace fedgh
