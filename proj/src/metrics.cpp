#include "fedgh/metrics.hpp"

#include <cstdio>
#include <fstream>
#include <system_error>

#include "fedgh/error.hpp"

namespace fedgh {
namespace {

std::string sig6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

std::string format_csv(std::span<const RoundRecord> history) {
  std::string out = kMetricsCsvHeader;
  out += '\n';
  for (const auto& r : history) {
    out += std::to_string(r.round);
    for (double v : {r.test_loss, r.test_accuracy, r.conflict_ratio, r.min_similarity}) {
      out += ',';
      out += sig6(v);
    }
    out += ',';
    out += std::to_string(r.projections_applied);
    out += ',';
    out += sig6(r.wall_ms);
    out += '\n';
  }
  return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  f.close();
  if (!f) throw IoError("failed writing " + path.string());
}

void export_csv(std::span<const RoundRecord> history, const std::filesystem::path& path) {
  if (history.empty()) throw ContractError("export_csv: empty history");
  write_text_file(path, format_csv(history));
}

nlohmann::json similarity_snapshot(const ConflictReport& report, std::size_t round) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& p : report.sorted_pairs()) {
    pairs.push_back({{"i", p.client_i}, {"j", p.client_j}, {"similarity", p.similarity}});
  }
  return {{"round", round},
          {"client_ids", report.client_ids},
          {"conflict_ratio", report.conflict_ratio},
          {"min_similarity", report.min_similarity},
          {"pairs", std::move(pairs)}};
}

void export_similarity_snapshot(const ConflictReport& report, std::size_t round, const std::filesystem::path& path) {
  if (report.size() < 2) throw ContractError("export_similarity_snapshot: report has no client pairs");
  write_text_file(path, similarity_snapshot(report, round).dump(2) + "\n");
}

}  // namespace fedgh
