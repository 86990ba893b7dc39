#include <doctest.h>

#include <cmath>
#include <random>

#include "fedgh/error.hpp"
#include "fedgh/paramvec.hpp"
#include "test_helpers.hpp"

using namespace fedgh;

TEST_CASE("dot: hand examples") {
  CHECK(dot({1, 0}, {0, 1}) == 0.0);
  CHECK(dot({1, 1}, {-1, 0}) == -1.0);
  CHECK_THROWS_AS(dot({1, 2}, {1, 2, 3}), ContractError);
}

TEST_CASE("dot: agrees with an extended-precision compensated sum") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = testing::random_vector(1000, rng);
    const auto b = testing::random_vector(1000, rng);
    // Kahan summation in long double as the reference.
    long double sum = 0.0L, comp = 0.0L;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const long double y = static_cast<long double>(a[i]) * static_cast<long double>(b[i]) - comp;
      const long double t = sum + y;
      comp = (t - sum) - y;
      sum = t;
    }
    const double ref = static_cast<double>(sum);
    CHECK(std::fabs(dot(a, b) - ref) <= 1e-12 * std::fabs(ref));
  }
}

TEST_CASE("cosine_similarity") {
  CHECK(cosine_similarity({2, 0}, {4, 0}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(cosine_similarity({1, 0}, {-1, 0}) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(cosine_similarity({0, 0}, {1, 1}) == 0.0);
  CHECK(cosine_similarity({1, 1}, {0, 0}) == 0.0);

  SUBCASE("symmetric, scale invariant and clamped") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> pos(0.01, 100.0);
    for (int trial = 0; trial < 200; ++trial) {
      const auto a = testing::random_vector(1 + trial % 50, rng);
      const auto b = testing::random_vector(1 + trial % 50, rng);
      const double c = cosine_similarity(a, b);
      CHECK(c >= -1.0);
      CHECK(c <= 1.0);
      CHECK(c == cosine_similarity(b, a));
      CHECK(cosine_similarity(scale(pos(rng), a), b) == doctest::Approx(c).epsilon(1e-12));
    }
    // Identical vectors whose rounded cosine lands just above 1.
    const ParamVector v{0.1, 0.2, 0.3};
    CHECK(cosine_similarity(v, v) <= 1.0);
  }
}

TEST_CASE("project_out: hand examples") {
  CHECK(project_out({1, 1}, {-1, 0}) == ParamVector{0, 1});
  CHECK(project_out({0, 1}, {1, 0}) == ParamVector{0, 1});
  CHECK(project_out({-2, 0}, {1, 0}) == ParamVector{0, 0});
  CHECK_THROWS_AS(project_out({1, 1}, {0, 0}), ContractError);
  CHECK_THROWS_AS(project_out({1, 1}, {1, 0, 0}), ContractError);
}

TEST_CASE("project_out: orthogonality, idempotence and norm bound on random inputs") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<std::size_t> dim(2, 500);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = dim(rng);
    const auto g = testing::random_vector(n, rng);
    const auto f = testing::random_vector(n, rng);
    // Both signs of dot(g, f) show up across trials; the identities hold either way.
    const auto p = project_out(g, f);
    CHECK(std::fabs(dot(p, f)) <= 1e-10 * norm(g) * norm(f));
    CHECK(norm(p) <= norm(g) * (1.0 + 1e-15));
    const auto pp = project_out(p, f);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::fabs(pp[i] - p[i]) <= 1e-12);
  }
}

TEST_CASE("axpy and companions") {
  const ParamVector x{1, 2};
  const ParamVector y{3, 4};
  CHECK(axpy(0.0, x, y) == y);
  CHECK(axpy(1.0, x, ParamVector(2)) == x);
  CHECK(axpy(2.0, x, y) == ParamVector{5, 8});
  CHECK(add(x, y) == ParamVector{4, 6});
  CHECK(sub(y, x) == ParamVector{2, 2});
  CHECK(scale(-1.0, x) == ParamVector{-1, -2});
  CHECK(norm({3, 4}) == 5.0);
  CHECK_THROWS_AS(axpy(1.0, x, ParamVector{1, 2, 3}), ContractError);
  CHECK_THROWS_AS(sub(x, ParamVector{1}), ContractError);
}

TEST_CASE("non-finite results are rejected") {
  const double big = 1e308;
  CHECK_THROWS_AS(scale(10.0, ParamVector{big}), ContractError);
  CHECK_THROWS_AS(dot({big, big}, {big, big}), ContractError);
  CHECK_THROWS_AS(add({big}, {big}), ContractError);
}
