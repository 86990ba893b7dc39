#include <doctest.h>

#include <cmath>
#include <numeric>
#include <string>

#include "fedgh/datagen.hpp"
#include "fedgh/error.hpp"
#include "fedgh/rng.hpp"
#include "fedgh/trainer.hpp"
#include "test_helpers.hpp"

using namespace fedgh;

namespace {

std::vector<std::size_t> iota_indices(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

double distance(const ParamVector& a, const ParamVector& b) { return norm(sub(a, b)); }

}  // namespace

TEST_CASE("local config validation") {
  CHECK_THROWS_AS((LocalConfig{0, 1, 0.1, 0.0, 0.0}.validate()), ContractError);
  CHECK_THROWS_AS((LocalConfig{1, 0, 0.1, 0.0, 0.0}.validate()), ContractError);
  CHECK_THROWS_AS((LocalConfig{1, 1, 0.0, 0.0, 0.0}.validate()), ContractError);
  CHECK_THROWS_AS((LocalConfig{1, 1, 0.1, 1.0, 0.0}.validate()), ContractError);
  CHECK_THROWS_AS((LocalConfig{1, 1, 0.1, 0.0, -0.1}.validate()), ContractError);
  CHECK_NOTHROW((LocalConfig{}.validate()));
}

TEST_CASE("zero gradient leaves the model where it started") {
  // Zero features put the quadratic optimum at the target; starting there, no step moves.
  const auto spec = ModelSpec::quadratic({1.0, 2.0}, ParamVector{0.5, -0.5});
  Batch data{2, std::vector<double>(6, 0.0), {0, 0, 0}};
  const ParamVector start{0.5, -0.5};
  const auto r = client_update(spec, start, data, iota_indices(3), {1, 8, 0.1, 0.9, 0.0}, {1, 1, 0});
  CHECK(r.final_params == start);
  CHECK(r.tau_k == 1);
}

TEST_CASE("quadratic full-batch gradient descent contracts towards the optimum") {
  const auto spec = ModelSpec::quadratic({1.0, 3.0, 0.5}, ParamVector{2.0, -1.0, 4.0});
  Batch data{3, std::vector<double>(3 * 4, 0.0), {0, 0, 0, 0}};
  const ParamVector start(3);
  const auto r = client_update(spec, start, data, iota_indices(4), {3, 4, 0.1, 0.0, 0.0}, {1, 1, 0});
  CHECK(distance(r.final_params, spec.target) < distance(start, spec.target));
  CHECK(r.local_loss_trace.size() == 3);
  CHECK(r.local_loss_trace[2] < r.local_loss_trace[0]);
}

TEST_CASE("step counting, determinism and stateless momentum") {
  const auto ds = generate_gaussian_mixture(3, 10, 4, 3.0, 1);
  const auto spec = ModelSpec::mlp(4, 5, 3);
  const auto w0 = init_params(spec, 2);
  const LocalConfig cfg{3, 7, 0.05, 0.9, 0.0};
  const auto idx = iota_indices(ds.size());
  const auto a = client_update(spec, w0, ds.samples, idx, cfg, {9, 4, 2});
  const auto b = client_update(spec, w0, ds.samples, idx, cfg, {9, 4, 2});
  CHECK(a.tau_k == 3 * 5);  // ceil(30 / 7) = 5 batches per epoch, partial batch kept
  CHECK(a.n_k == 30);
  CHECK(a.client_id == 2);
  CHECK(a.final_params == b.final_params);
  CHECK(a.local_loss_trace == b.local_loss_trace);
  // A different (round, client) stream reshuffles differently.
  CHECK(client_update(spec, w0, ds.samples, idx, cfg, {9, 5, 2}).final_params != a.final_params);
}

TEST_CASE("one full-batch plain SGD step recovers the negated exact gradient") {
  std::mt19937_64 rng(4);
  const auto spec = ModelSpec::logistic(6, 3);
  const auto batch = testing::random_batch(12, 6, 3, rng);
  const auto w0 = testing::random_vector(spec.param_count(), rng);
  const double eta = 0.01;
  const auto r = client_update(spec, w0, batch, iota_indices(12), {1, 64, eta, 0.0, 0.0}, {1, 1, 0});
  const auto exact = loss_and_grad(spec, w0, batch).grad;
  for (std::size_t i = 0; i < w0.size(); ++i) CHECK(std::fabs((r.final_params[i] - w0[i]) / eta + exact[i]) <= 1e-10);
}

TEST_CASE("momentum follows v <- m v - lr g, w <- w + v") {
  // One-dimensional quadratic with A = 1, w* = 0: g = w.
  const auto spec = ModelSpec::quadratic({1.0}, ParamVector{0.0});
  Batch data{1, {0.0}, {0}};
  const double lr = 0.1, m = 0.5;
  const auto r = client_update(spec, ParamVector{1.0}, data, iota_indices(1), {3, 1, lr, m, 0.0}, {1, 1, 0});
  double w = 1.0, v = 0.0;
  for (int s = 0; s < 3; ++s) {
    v = m * v - lr * w;
    w += v;
  }
  CHECK(r.final_params[0] == doctest::Approx(w).epsilon(1e-15));
}

TEST_CASE("proximal term limits drift from the global model") {
  const auto ds = generate_gaussian_mixture(4, 30, 5, 3.0, 8);
  const auto spec = ModelSpec::mlp(5, 6, 4);
  const auto part = partition_dirichlet(ds, 4, 0.1, 3);
  const LocalConfig plain{5, 8, 0.05, 0.9, 0.0};
  LocalConfig prox = plain;
  prox.prox_mu = 0.1;

  SUBCASE("same seed and data") {
    const auto w0 = init_params(spec, 5);
    const auto a = client_update(spec, w0, ds.samples, part.assignments[0], plain, {3, 1, 0});
    const auto b = client_update(spec, w0, ds.samples, part.assignments[0], prox, {3, 1, 0});
    CHECK(distance(b.final_params, w0) <= distance(a.final_params, w0));
  }
  SUBCASE("mean drift over 10 seeds") {
    double drift_plain = 0.0, drift_prox = 0.0;
    for (std::uint64_t s = 0; s < 10; ++s) {
      const auto w0 = init_params(spec, s);
      for (std::size_t k = 0; k < part.num_clients(); ++k) {
        drift_plain += distance(client_update(spec, w0, ds.samples, part.assignments[k], plain, {s, 1, k}).final_params, w0);
        drift_prox += distance(client_update(spec, w0, ds.samples, part.assignments[k], prox, {s, 1, k}).final_params, w0);
      }
    }
    CHECK(drift_prox <= drift_plain);
  }
}

TEST_CASE("divergence and misuse") {
  const auto spec = ModelSpec::quadratic({1.0}, ParamVector{0.0});
  Batch data{1, {0.0}, {0}};
  // lr = 3 on curvature 1 multiplies the error by -2 each step; it overflows within ~1100 steps.
  try {
    client_update(spec, ParamVector{1.0}, data, iota_indices(1), {2000, 1, 3.0, 0.0, 0.0}, {1, 1, 7});
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(std::string(e.what()).find("client 7") != std::string::npos);
  }
  CHECK_THROWS_AS(client_update(spec, ParamVector{1.0}, data, {}, LocalConfig{}, {1, 1, 0}), ContractError);
}
