#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "fedgh/harmonizer.hpp"

namespace fedgh {

struct RoundRecord {
  std::size_t round = 0;  // 1-based
  double test_loss = 0.0;
  double test_accuracy = 0.0;  // NaN for the quadratic model
  double conflict_ratio = 0.0;
  double min_similarity = 0.0;
  std::size_t projections_applied = 0;
  double wall_ms = 0.0;
  ConflictReport conflicts;  // full pre-harmonization report of the round
};

inline constexpr const char* kMetricsCsvHeader =
    "round,test_loss,test_acc,conflict_ratio,min_similarity,projections,wall_ms";

/// CSV text for a history: the fixed header, then one row per round, reals at 6 significant digits.
std::string format_csv(std::span<const RoundRecord> history);

/// Writes format_csv(history) to path. Empty history is a ContractError; I/O failures raise IoError.
void export_csv(std::span<const RoundRecord> history, const std::filesystem::path& path);

/// {"round", "client_ids", "min_similarity", "pairs": [{"i", "j", "similarity"}...]}, pairs ascending.
nlohmann::json similarity_snapshot(const ConflictReport& report, std::size_t round);

void export_similarity_snapshot(const ConflictReport& report, std::size_t round, const std::filesystem::path& path);

/// Writes text to path, creating parent directories; IoError names the path on failure.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace fedgh
