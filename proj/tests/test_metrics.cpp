#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "fedgh/error.hpp"
#include "fedgh/metrics.hpp"
#include "test_helpers.hpp"

using namespace fedgh;
namespace fs = std::filesystem;

namespace {

RoundRecord record(std::size_t round, double loss, double acc, double cr, double ms, std::size_t proj) {
  RoundRecord r;
  r.round = round;
  r.test_loss = loss;
  r.test_accuracy = acc;
  r.conflict_ratio = cr;
  r.min_similarity = ms;
  r.projections_applied = proj;
  return r;
}

std::vector<std::string> split_lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  for (std::string f; std::getline(in, f, ',');) out.push_back(f);
  return out;
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / "fedgh_tests" / name;
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

ConflictReport report_for(std::vector<ParamVector> g) {
  std::vector<std::size_t> ids(g.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i * 3 + 1;
  return measure_conflicts(GradientSet(ids, std::move(g), 0.1));
}

}  // namespace

TEST_CASE("csv layout") {
  std::vector<RoundRecord> h{record(1, 0.5, 0.75, 0.0, 0.2, 0)};
  const auto lines = split_lines(format_csv(h));
  REQUIRE(lines.size() == 2);
  CHECK(lines[0] == "round,test_loss,test_acc,conflict_ratio,min_similarity,projections,wall_ms");
  CHECK(lines[1] == "1,0.5,0.75,0,0.2,0,0");
  CHECK(format_csv(h).find('\r') == std::string::npos);
  CHECK(format_csv(h).back() == '\n');
}

TEST_CASE("csv values round-trip at 6 significant digits") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<RoundRecord> h;
  for (std::size_t t = 1; t <= 50; ++t) {
    h.push_back(record(t, std::exp(8 * u(rng)), 0.5 + 0.5 * u(rng), 0.5 + 0.5 * u(rng), u(rng), t % 7));
  }
  const auto lines = split_lines(format_csv(h));
  REQUIRE(lines.size() == 51);
  for (std::size_t t = 0; t < h.size(); ++t) {
    const auto f = split_fields(lines[t + 1]);
    REQUIRE(f.size() == 7);
    CHECK(std::stoul(f[0]) == h[t].round);
    const double expect[] = {h[t].test_loss, h[t].test_accuracy, h[t].conflict_ratio, h[t].min_similarity};
    for (int k = 0; k < 4; ++k) {
      const double back = std::stod(f[k + 1]);
      CHECK(std::fabs(back - expect[k]) <= 5e-6 * std::fabs(expect[k]) + 1e-300);
    }
    CHECK(std::stoul(f[5]) == h[t].projections_applied);
  }
}

TEST_CASE("csv nan accuracy") {
  std::vector<RoundRecord> h{record(1, 2.0, std::nan(""), 0.0, 1.0, 0)};
  CHECK(split_fields(split_lines(format_csv(h))[1])[2] == "nan");
}

TEST_CASE("export_csv") {
  const auto dir = scratch("csv");
  std::vector<RoundRecord> h{record(1, 1.0, 0.5, 0.1, -0.2, 1), record(2, 0.9, 0.6, 0.1, -0.2, 2)};
  export_csv(h, dir / "a" / "metrics.csv");
  export_csv(h, dir / "b" / "metrics.csv");
  CHECK(slurp(dir / "a" / "metrics.csv") == format_csv(h));
  CHECK(slurp(dir / "a" / "metrics.csv") == slurp(dir / "b" / "metrics.csv"));

  CHECK_THROWS_AS(export_csv(std::vector<RoundRecord>{}, dir / "empty.csv"), ContractError);

  // A regular file where a directory is needed.
  write_text_file(dir / "blocker", "x");
  CHECK_THROWS_AS(export_csv(h, dir / "blocker" / "metrics.csv"), IoError);
}

TEST_CASE("similarity snapshot") {
  const auto rep = report_for({ParamVector{1, 0}, ParamVector{-1, 0.2}, ParamVector{0.5, 1}});
  const auto j = similarity_snapshot(rep, 4);
  CHECK(j["round"] == 4);
  CHECK(j["client_ids"] == nlohmann::json({1, 4, 7}));
  REQUIRE(j["pairs"].size() == 3);
  for (std::size_t p = 1; p < 3; ++p) {
    CHECK(j["pairs"][p - 1]["similarity"].get<double>() <= j["pairs"][p]["similarity"].get<double>());
  }
  CHECK(j["pairs"][0]["similarity"].get<double>() == rep.min_similarity);
  CHECK(j["min_similarity"].get<double>() == rep.min_similarity);
  CHECK(j["pairs"][0]["i"] == 1);
  CHECK(j["pairs"][0]["j"] == 4);
}

TEST_CASE("similarity snapshot matches a brute-force sort") {
  std::mt19937_64 rng(8);
  std::vector<ParamVector> g;
  for (int k = 0; k < 10; ++k) g.push_back(testing::random_vector(6, rng));
  const auto rep = report_for(g);
  std::vector<double> sims;
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t j = i + 1; j < g.size(); ++j) sims.push_back(cosine_similarity(g[i], g[j]));
  }
  std::sort(sims.begin(), sims.end());
  const auto j = similarity_snapshot(rep, 1);
  REQUIRE(j["pairs"].size() == 45);
  for (std::size_t p = 0; p < sims.size(); ++p) CHECK(j["pairs"][p]["similarity"].get<double>() == sims[p]);
}

TEST_CASE("export_similarity_snapshot") {
  const auto dir = scratch("snap");
  const auto rep = report_for({ParamVector{1, 0}, ParamVector{-1, 0.2}});
  export_similarity_snapshot(rep, 2, dir / "sim_round2.json");
  const auto text = slurp(dir / "sim_round2.json");
  CHECK(nlohmann::json::parse(text) == similarity_snapshot(rep, 2));
  CHECK(text.back() == '\n');
  const auto single = report_for({ParamVector{1, 0}});
  CHECK_THROWS_AS(export_similarity_snapshot(single, 1, dir / "x.json"), ContractError);
}
