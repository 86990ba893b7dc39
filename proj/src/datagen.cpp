#include "fedgh/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "fedgh/error.hpp"
#include "fedgh/rng.hpp"

namespace fedgh {
namespace {

constexpr int kMaxPartitionAttempts = 100;

void standardize(Batch& b) {
  const std::size_t n = b.rows();
  for (std::size_t j = 0; j < b.dim; ++j) {
    double mean = 0.0;
    for (std::size_t r = 0; r < n; ++r) mean += b.features[r * b.dim + j];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double d = b.features[r * b.dim + j] - mean;
      var += d * d;
    }
    var /= static_cast<double>(n);
    const double sd = var > 1e-24 ? std::sqrt(var) : 1.0;
    for (std::size_t r = 0; r < n; ++r) {
      double& v = b.features[r * b.dim + j];
      v = (v - mean) / sd;
    }
  }
}

// Dirichlet(alpha, ..., alpha) via normalized gammas. Small alpha works in log space
// (Gamma(a) = Gamma(a + 1) * U^(1/a)) so the draw never underflows to all zeros.
std::vector<double> sample_dirichlet(std::size_t k, double alpha, Rng& rng) {
  std::vector<double> p(k);
  if (alpha >= 1.0) {
    std::gamma_distribution<double> gamma(alpha, 1.0);
    double sum = 0.0;
    for (double& v : p) sum += (v = gamma(rng));
    for (double& v : p) v /= sum;
    return p;
  }
  std::gamma_distribution<double> gamma(alpha + 1.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> logs(k);
  for (double& l : logs) {
    double u = unif(rng);
    while (u <= 0.0) u = unif(rng);
    l = std::log(gamma(rng)) + std::log(u) / alpha;
  }
  const double mx = *std::max_element(logs.begin(), logs.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) sum += (p[i] = std::exp(logs[i] - mx));
  for (double& v : p) v /= sum;
  return p;
}

// Integer counts summing to total, proportional to p; leftover units go to the largest
// fractional parts, lower index first on ties.
std::vector<std::size_t> largest_remainder(const std::vector<double>& p, std::size_t total) {
  std::vector<std::size_t> counts(p.size());
  std::vector<double> frac(p.size());
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double exact = p[i] * static_cast<double>(total);
    counts[i] = static_cast<std::size_t>(std::floor(exact));
    frac[i] = exact - static_cast<double>(counts[i]);
    assigned += counts[i];
  }
  // Floating error can push the floors one over in pathological cases.
  while (assigned > total) {
    auto it = std::max_element(counts.begin(), counts.end());
    --*it;
    --assigned;
  }
  std::vector<std::size_t> order(p.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
  for (std::size_t i = 0; assigned < total; i = (i + 1) % order.size()) {
    ++counts[order[i]];
    ++assigned;
  }
  return counts;
}

Partition draw_dirichlet(const std::vector<std::vector<std::size_t>>& by_class, std::size_t num_clients,
                         double alpha, std::uint64_t seed) {
  Rng rng(seed);
  Partition part;
  part.scheme = PartitionScheme::dirichlet;
  part.alpha = alpha;
  part.assignments.assign(num_clients, {});
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    std::vector<std::size_t> members = by_class[c];
    std::shuffle(members.begin(), members.end(), rng);
    std::vector<std::size_t> counts(num_clients, 0);
    if (std::isinf(alpha)) {
      const std::size_t base = members.size() / num_clients;
      const std::size_t extra = members.size() % num_clients;
      std::fill(counts.begin(), counts.end(), base);
      for (std::size_t i = 0; i < extra; ++i) ++counts[(c + i) % num_clients];
    } else {
      counts = largest_remainder(sample_dirichlet(num_clients, alpha, rng), members.size());
    }
    std::size_t pos = 0;
    for (std::size_t k = 0; k < num_clients; ++k) {
      auto& dst = part.assignments[k];
      dst.insert(dst.end(), members.begin() + static_cast<std::ptrdiff_t>(pos),
                 members.begin() + static_cast<std::ptrdiff_t>(pos + counts[k]));
      pos += counts[k];
    }
  }
  return part;
}

}  // namespace

std::vector<std::vector<std::size_t>> SyntheticDataset::indices_by_class() const {
  std::vector<std::vector<std::size_t>> out(num_classes);
  for (std::size_t i = 0; i < samples.rows(); ++i) out[static_cast<std::size_t>(samples.labels[i])].push_back(i);
  return out;
}

SyntheticDataset generate_gaussian_mixture(std::size_t num_classes, std::size_t per_class, std::size_t dim,
                                           double separation, std::uint64_t seed) {
  if (num_classes == 0 || per_class == 0 || dim == 0) {
    throw ContractError("generate_gaussian_mixture: counts and dim must be positive");
  }
  if (!(separation > 0.0)) throw ContractError("generate_gaussian_mixture: separation must be > 0");

  Rng rng(derive_seed(seed, Stream::data));
  std::normal_distribution<double> normal(0.0, 1.0);

  SyntheticDataset ds;
  ds.num_classes = num_classes;
  ds.separation = separation;
  ds.seed = seed;
  ds.class_means.resize(num_classes);
  for (auto& mean : ds.class_means) {
    mean.resize(dim);
    double sq = 0.0;
    do {
      sq = 0.0;
      for (double& v : mean) {
        v = normal(rng);
        sq += v * v;
      }
    } while (sq < 1e-12);
    const double s = separation / std::sqrt(sq);
    for (double& v : mean) v *= s;
  }

  ds.samples.dim = dim;
  ds.samples.features.reserve(num_classes * per_class * dim);
  ds.samples.labels.reserve(num_classes * per_class);
  for (std::size_t c = 0; c < num_classes; ++c) {
    for (std::size_t i = 0; i < per_class; ++i) {
      for (std::size_t j = 0; j < dim; ++j) ds.samples.features.push_back(ds.class_means[c][j] + normal(rng));
      ds.samples.labels.push_back(static_cast<int>(c));
    }
  }
  standardize(ds.samples);
  return ds;
}

std::pair<SyntheticDataset, SyntheticDataset> split_holdout(const SyntheticDataset& ds, double fraction,
                                                            std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw ContractError("split_holdout: fraction must be in (0, 1)");
  Rng rng(derive_seed(seed, Stream::holdout));
  std::vector<std::size_t> train_idx, test_idx;
  for (auto members : ds.indices_by_class()) {
    if (members.empty()) continue;
    std::shuffle(members.begin(), members.end(), rng);
    auto take = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(members.size())));
    take = members.size() == 1 ? 0 : std::clamp<std::size_t>(take, 1, members.size() - 1);
    std::sort(members.begin(), members.begin() + static_cast<std::ptrdiff_t>(take));
    std::sort(members.begin() + static_cast<std::ptrdiff_t>(take), members.end());
    test_idx.insert(test_idx.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(take));
    train_idx.insert(train_idx.end(), members.begin() + static_cast<std::ptrdiff_t>(take), members.end());
  }
  auto subset = [&](const std::vector<std::size_t>& idx) {
    SyntheticDataset out;
    out.samples = ds.samples.gather(idx);
    out.num_classes = ds.num_classes;
    out.class_means = ds.class_means;
    out.separation = ds.separation;
    out.seed = ds.seed;
    return out;
  };
  return {subset(train_idx), subset(test_idx)};
}

const char* to_string(PartitionScheme scheme) noexcept {
  switch (scheme) {
    case PartitionScheme::dirichlet: return "dirichlet";
    case PartitionScheme::class_shard: return "class_shard";
    case PartitionScheme::iid: return "iid";
  }
  return "unknown";
}

std::size_t Partition::total_assigned() const noexcept {
  std::size_t n = 0;
  for (const auto& a : assignments) n += a.size();
  return n;
}

Partition partition_dirichlet(const SyntheticDataset& ds, std::size_t num_clients, double alpha,
                              std::uint64_t seed) {
  if (num_clients == 0) throw ContractError("partition_dirichlet: need at least one client");
  if (!(alpha > 0.0)) throw ContractError("partition_dirichlet: alpha must be > 0");
  if (ds.size() < num_clients) throw ContractError("partition_dirichlet: fewer samples than clients");
  const auto by_class = ds.indices_by_class();
  for (int attempt = 0; attempt < kMaxPartitionAttempts; ++attempt) {
    Partition p = draw_dirichlet(by_class, num_clients, alpha, seed + static_cast<std::uint64_t>(attempt));
    const bool any_empty =
        std::any_of(p.assignments.begin(), p.assignments.end(), [](const auto& a) { return a.empty(); });
    if (!any_empty) return p;
  }
  throw PartitionError("partition_dirichlet: some client stayed empty after " +
                       std::to_string(kMaxPartitionAttempts) + " draws (K=" + std::to_string(num_clients) +
                       ", alpha=" + std::to_string(alpha) + ")");
}

Partition partition_class_shard(const SyntheticDataset& ds, std::size_t num_clients, std::uint64_t seed) {
  if (num_clients == 0 || ds.num_classes % num_clients != 0) {
    throw ContractError("partition_class_shard: num_classes (" + std::to_string(ds.num_classes) +
                        ") must be divisible by the client count (" + std::to_string(num_clients) + ")");
  }
  Rng rng(seed);
  std::vector<std::size_t> classes(ds.num_classes);
  std::iota(classes.begin(), classes.end(), 0);
  std::shuffle(classes.begin(), classes.end(), rng);
  const std::size_t per_client = ds.num_classes / num_clients;
  const auto by_class = ds.indices_by_class();

  Partition part;
  part.scheme = PartitionScheme::class_shard;
  part.assignments.assign(num_clients, {});
  for (std::size_t k = 0; k < num_clients; ++k) {
    auto& dst = part.assignments[k];
    for (std::size_t i = 0; i < per_client; ++i) {
      const auto& members = by_class[classes[k * per_client + i]];
      dst.insert(dst.end(), members.begin(), members.end());
    }
    std::sort(dst.begin(), dst.end());
  }
  return part;
}

Partition partition_iid(const SyntheticDataset& ds, std::size_t num_clients, std::uint64_t seed) {
  if (num_clients == 0 || ds.size() < num_clients) {
    throw ContractError("partition_iid: need 1 <= clients <= samples");
  }
  Rng rng(seed);
  std::vector<std::size_t> all(ds.size());
  std::iota(all.begin(), all.end(), 0);
  std::shuffle(all.begin(), all.end(), rng);
  Partition part;
  part.scheme = PartitionScheme::iid;
  part.assignments.assign(num_clients, {});
  for (std::size_t i = 0; i < all.size(); ++i) part.assignments[i % num_clients].push_back(all[i]);
  return part;
}

double label_entropy(const SyntheticDataset& ds, const std::vector<std::size_t>& indices) {
  if (indices.empty()) return 0.0;
  std::vector<double> hist(ds.num_classes, 0.0);
  for (std::size_t i : indices) hist[static_cast<std::size_t>(ds.samples.labels.at(i))] += 1.0;
  double h = 0.0;
  for (double c : hist) {
    if (c > 0.0) {
      const double p = c / static_cast<double>(indices.size());
      h -= p * std::log(p);
    }
  }
  return h;
}

nlohmann::json to_json(const Partition& p) {
  nlohmann::json j;
  j["scheme"] = to_string(p.scheme);
  if (std::isinf(p.alpha)) {
    j["alpha"] = "inf";
  } else {
    j["alpha"] = p.alpha;
  }
  j["num_clients"] = p.num_clients();
  j["total_assigned"] = p.total_assigned();
  nlohmann::json clients = nlohmann::json::array();
  for (std::size_t k = 0; k < p.num_clients(); ++k) {
    clients.push_back({{"client", k}, {"n_k", p.n_k(k)}, {"indices", p.assignments[k]}});
  }
  j["clients"] = std::move(clients);
  return j;
}

nlohmann::json describe(const SyntheticDataset& ds) {
  std::vector<std::size_t> counts(ds.num_classes, 0);
  for (int y : ds.samples.labels) ++counts[static_cast<std::size_t>(y)];
  return {{"num_samples", ds.size()}, {"dim", ds.dim()},          {"num_classes", ds.num_classes},
          {"separation", ds.separation}, {"seed", ds.seed},       {"class_counts", counts}};
}

}  // namespace fedgh
