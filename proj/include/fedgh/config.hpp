#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fedgh/datagen.hpp"
#include "fedgh/models.hpp"
#include "fedgh/server.hpp"
#include "fedgh/trainer.hpp"

namespace fedgh {

struct ModelConfig {
  ModelKind kind = ModelKind::logistic;
  std::size_t hidden_dim = 32;     // mlp
  std::vector<double> curvature;   // quadratic, resolved to length data.dim
  std::vector<double> target;      // quadratic, resolved to length data.dim
};

struct DataConfig {
  std::size_t num_classes = 10;
  std::size_t per_class = 100;
  std::size_t dim = 20;
  double separation = 3.0;
  double test_fraction = 0.1;
};

struct PartitionConfig {
  PartitionScheme scheme = PartitionScheme::iid;
  double alpha = kIidAlpha;  // dirichlet only
  std::size_t clients = 1;
};

struct ExperimentConfig {
  ModelConfig model;
  DataConfig data;
  PartitionConfig partition;
  LocalConfig local;
  std::vector<StrategyConfig> strategies;
  std::vector<std::uint64_t> seeds;
  std::string output_dir = "runs";
  std::size_t threads = 1;
  bool record_timing = false;

  ModelSpec model_spec() const;
};

/// Parses and validates a JSON run description (// and /* */ comments allowed). Every default is resolved in the
/// result; unknown keys, missing required fields and invalid values throw
/// ConfigError naming the dotted field path.
ExperimentConfig parse_config(std::string_view text);

ExperimentConfig load_config(const std::filesystem::path& path);

/// Resolved configuration, in the same schema parse_config accepts.
nlohmann::json to_json(const ExperimentConfig& cfg);

}  // namespace fedgh
