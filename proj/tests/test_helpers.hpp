#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "fedgh/models.hpp"
#include "fedgh/paramvec.hpp"

namespace fedgh::testing {

inline ParamVector random_vector(std::size_t n, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  ParamVector v(n);
  for (double& x : v) x = d(rng);
  return v;
}

inline Batch random_batch(std::size_t rows, std::size_t dim, std::size_t classes, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_int_distribution<int> label(0, static_cast<int>(classes) - 1);
  Batch b;
  b.dim = dim;
  for (std::size_t i = 0; i < rows * dim; ++i) b.features.push_back(n(rng));
  for (std::size_t i = 0; i < rows; ++i) b.labels.push_back(label(rng));
  return b;
}

// Central differences of evaluate_loss, one coordinate at a time.
inline std::vector<double> finite_difference_grad(const ModelSpec& spec, const ParamVector& w, const Batch& batch,
                                                  double step) {
  std::vector<double> g(w.size());
  ParamVector probe = w;
  for (std::size_t i = 0; i < w.size(); ++i) {
    probe[i] = w[i] + step;
    const double up = evaluate_loss(spec, probe, batch);
    probe[i] = w[i] - step;
    const double down = evaluate_loss(spec, probe, batch);
    probe[i] = w[i];
    g[i] = (up - down) / (2.0 * step);
  }
  return g;
}

}  // namespace fedgh::testing
