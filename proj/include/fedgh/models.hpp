#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fedgh/paramvec.hpp"

namespace fedgh {

enum class ModelKind { logistic, mlp, quadratic };

const char* to_string(ModelKind kind) noexcept;

/// Architecture of a model; fixes the parameter layout.
///
///  - logistic:  W [num_classes x input_dim], b [num_classes]
///  - mlp:       W1 [hidden_dim x input_dim], b1 [hidden_dim],
///               W2 [num_classes x hidden_dim], b2 [num_classes]; tanh hidden layer
///  - quadratic: w [input_dim]; per-sample loss 0.5 * sum_i A_i (w_i - target_i - x_i)^2,
///               so a sample's features shift the optimum away from `target`
struct ModelSpec {
  ModelKind kind = ModelKind::logistic;
  std::size_t input_dim = 0;
  std::size_t num_classes = 2;
  std::size_t hidden_dim = 0;
  std::vector<double> curvature;  // A, quadratic only
  ParamVector target;             // w*, quadratic only

  static ModelSpec logistic(std::size_t input_dim, std::size_t num_classes);
  static ModelSpec mlp(std::size_t input_dim, std::size_t hidden_dim, std::size_t num_classes);
  static ModelSpec quadratic(std::vector<double> curvature, ParamVector target);

  bool is_classifier() const noexcept { return kind != ModelKind::quadratic; }
  std::size_t param_count() const noexcept;
  void validate() const;
};

/// Row-major feature matrix with one label per row.
struct Batch {
  std::size_t dim = 0;
  std::vector<double> features;
  std::vector<int> labels;

  std::size_t rows() const noexcept { return labels.size(); }
  std::span<const double> row(std::size_t i) const noexcept { return {features.data() + i * dim, dim}; }

  /// Copies the listed rows into a new batch, in listed order.
  Batch gather(std::span<const std::size_t> indices) const;
};

struct LossAndGrad {
  double loss = 0.0;
  ParamVector grad;
};

ParamVector init_params(const ModelSpec& spec, std::uint64_t seed);

/// Mean cross-entropy (classifiers) or mean quadratic loss, with its exact gradient.
LossAndGrad loss_and_grad(const ModelSpec& spec, const ParamVector& w, const Batch& batch);

/// Same loss as loss_and_grad without the backward pass.
double evaluate_loss(const ModelSpec& spec, const ParamVector& w, const Batch& batch);

/// Fraction of rows whose argmax logit equals the label; ties go to the lowest class.
double accuracy(const ModelSpec& spec, const ParamVector& w, const Batch& data);

}  // namespace fedgh
