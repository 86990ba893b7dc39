#include "fedgh/models.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "fedgh/error.hpp"
#include "fedgh/rng.hpp"

namespace fedgh {
namespace {

void check_inputs(const ModelSpec& spec, const ParamVector& w, const Batch& batch) {
  if (w.size() != spec.param_count()) {
    throw ContractError("model: parameter length " + std::to_string(w.size()) + " != expected " +
                        std::to_string(spec.param_count()));
  }
  if (batch.rows() == 0) throw ContractError("model: empty batch");
  if (batch.dim != spec.input_dim) {
    throw ContractError("model: batch dim " + std::to_string(batch.dim) + " != input_dim " +
                        std::to_string(spec.input_dim));
  }
  if (batch.features.size() != batch.rows() * batch.dim) throw ContractError("model: malformed batch");
  if (spec.is_classifier()) {
    for (int y : batch.labels) {
      if (y < 0 || static_cast<std::size_t>(y) >= spec.num_classes) {
        throw ContractError("model: label " + std::to_string(y) + " out of range");
      }
    }
  }
}

// out = M x + b for M [rows x cols] stored at m, b at m + rows*cols.
void affine(const double* m, std::size_t rows, std::size_t cols, std::span<const double> x, double* out) {
  const double* bias = m + rows * cols;
  for (std::size_t r = 0; r < rows; ++r) {
    const double* mr = m + r * cols;
    double acc = bias[r];
    for (std::size_t c = 0; c < cols; ++c) acc += mr[c] * x[c];
    out[r] = acc;
  }
}

// Converts logits to probabilities in place; returns log-sum-exp.
double softmax_inplace(std::vector<double>& z) {
  const double mx = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (double& v : z) v /= sum;
  return mx + std::log(sum);
}

struct Workspace {
  std::vector<double> hidden;
  std::vector<double> logits;
};

// Logits (and mlp hidden activations) of one row.
void forward(const ModelSpec& spec, const ParamVector& w, std::span<const double> x, Workspace& ws) {
  const double* p = w.span().data();
  ws.logits.resize(spec.num_classes);
  if (spec.kind == ModelKind::logistic) {
    affine(p, spec.num_classes, spec.input_dim, x, ws.logits.data());
    return;
  }
  ws.hidden.resize(spec.hidden_dim);
  affine(p, spec.hidden_dim, spec.input_dim, x, ws.hidden.data());
  for (double& h : ws.hidden) h = std::tanh(h);
  const double* out_layer = p + spec.hidden_dim * spec.input_dim + spec.hidden_dim;
  affine(out_layer, spec.num_classes, spec.hidden_dim, ws.hidden, ws.logits.data());
}

double quadratic_row_loss(const ModelSpec& spec, const ParamVector& w, std::span<const double> x) {
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double d = w[i] - spec.target[i] - x[i];
    acc += spec.curvature[i] * d * d;
  }
  return 0.5 * acc;
}

LossAndGrad quadratic_loss_and_grad(const ModelSpec& spec, const ParamVector& w, const Batch& batch) {
  const double inv = 1.0 / static_cast<double>(batch.rows());
  LossAndGrad out{0.0, ParamVector(w.size())};
  // Mean of per-row gradients A (w - target - x) equals A (w - target - mean x).
  std::vector<double> mean_x(w.size(), 0.0);
  for (std::size_t r = 0; r < batch.rows(); ++r) {
    auto x = batch.row(r);
    out.loss += quadratic_row_loss(spec, w, x);
    for (std::size_t i = 0; i < w.size(); ++i) mean_x[i] += x[i];
  }
  out.loss *= inv;
  for (std::size_t i = 0; i < w.size(); ++i) {
    out.grad[i] = spec.curvature[i] * (w[i] - spec.target[i] - mean_x[i] * inv);
  }
  return out;
}

}  // namespace

const char* to_string(ModelKind kind) noexcept {
  switch (kind) {
    case ModelKind::logistic: return "logistic";
    case ModelKind::mlp: return "mlp";
    case ModelKind::quadratic: return "quadratic";
  }
  return "unknown";
}

ModelSpec ModelSpec::logistic(std::size_t input_dim, std::size_t num_classes) {
  ModelSpec s;
  s.kind = ModelKind::logistic;
  s.input_dim = input_dim;
  s.num_classes = num_classes;
  s.validate();
  return s;
}

ModelSpec ModelSpec::mlp(std::size_t input_dim, std::size_t hidden_dim, std::size_t num_classes) {
  ModelSpec s;
  s.kind = ModelKind::mlp;
  s.input_dim = input_dim;
  s.hidden_dim = hidden_dim;
  s.num_classes = num_classes;
  s.validate();
  return s;
}

ModelSpec ModelSpec::quadratic(std::vector<double> curvature, ParamVector target) {
  ModelSpec s;
  s.kind = ModelKind::quadratic;
  s.input_dim = curvature.size();
  s.num_classes = 2;
  s.curvature = std::move(curvature);
  s.target = std::move(target);
  s.validate();
  return s;
}

std::size_t ModelSpec::param_count() const noexcept {
  switch (kind) {
    case ModelKind::logistic: return num_classes * input_dim + num_classes;
    case ModelKind::mlp: return hidden_dim * input_dim + hidden_dim + num_classes * hidden_dim + num_classes;
    case ModelKind::quadratic: return input_dim;
  }
  return 0;
}

void ModelSpec::validate() const {
  if (input_dim == 0) throw ContractError("model: input_dim must be positive");
  if (kind == ModelKind::quadratic) {
    if (curvature.size() != input_dim || target.size() != input_dim) {
      throw ContractError("model: quadratic curvature and target must have length input_dim");
    }
    for (double a : curvature) {
      if (!(a >= 1e-6) || !std::isfinite(a)) throw ContractError("model: quadratic curvature entries must be >= 1e-6");
    }
    if (!target.all_finite()) throw ContractError("model: quadratic target must be finite");
    return;
  }
  if (num_classes < 2) throw ContractError("model: num_classes must be >= 2");
  if (kind == ModelKind::mlp && hidden_dim == 0) throw ContractError("model: mlp hidden_dim must be positive");
}

Batch Batch::gather(std::span<const std::size_t> indices) const {
  Batch out;
  out.dim = dim;
  out.features.reserve(indices.size() * dim);
  out.labels.reserve(indices.size());
  for (std::size_t idx : indices) {
    if (idx >= rows()) throw ContractError("gather: index out of range");
    auto r = row(idx);
    out.features.insert(out.features.end(), r.begin(), r.end());
    out.labels.push_back(labels[idx]);
  }
  return out;
}

ParamVector init_params(const ModelSpec& spec, std::uint64_t seed) {
  spec.validate();
  ParamVector w(spec.param_count());
  if (spec.kind == ModelKind::quadratic) return w;

  Rng rng(derive_seed(seed, Stream::init));
  std::size_t offset = 0;
  auto fill_layer = [&](std::size_t fan_out, std::size_t fan_in) {
    const double s = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-s, s);
    for (std::size_t i = 0; i < fan_out * fan_in; ++i) w[offset++] = dist(rng);
    offset += fan_out;  // biases stay zero
  };
  if (spec.kind == ModelKind::logistic) {
    fill_layer(spec.num_classes, spec.input_dim);
  } else {
    fill_layer(spec.hidden_dim, spec.input_dim);
    fill_layer(spec.num_classes, spec.hidden_dim);
  }
  return w;
}

LossAndGrad loss_and_grad(const ModelSpec& spec, const ParamVector& w, const Batch& batch) {
  check_inputs(spec, w, batch);
  if (spec.kind == ModelKind::quadratic) return quadratic_loss_and_grad(spec, w, batch);

  const double inv = 1.0 / static_cast<double>(batch.rows());
  const std::size_t d = spec.input_dim;
  const std::size_t c = spec.num_classes;
  const std::size_t h = spec.hidden_dim;
  LossAndGrad out{0.0, ParamVector(w.size())};
  double* g = out.grad.span().data();
  const double* p = w.span().data();
  Workspace ws;
  std::vector<double> dhidden(h);

  for (std::size_t r = 0; r < batch.rows(); ++r) {
    auto x = batch.row(r);
    const auto y = static_cast<std::size_t>(batch.labels[r]);
    forward(spec, w, x, ws);
    const double true_logit = ws.logits[y];
    out.loss += softmax_inplace(ws.logits) - true_logit;
    ws.logits[y] -= 1.0;  // dL/dz for this row, before the 1/B factor
    for (double& v : ws.logits) v *= inv;

    if (spec.kind == ModelKind::logistic) {
      for (std::size_t k = 0; k < c; ++k) {
        double* gk = g + k * d;
        const double dz = ws.logits[k];
        for (std::size_t j = 0; j < d; ++j) gk[j] += dz * x[j];
        g[c * d + k] += dz;
      }
      continue;
    }

    const std::size_t w2_off = h * d + h;
    std::fill(dhidden.begin(), dhidden.end(), 0.0);
    for (std::size_t k = 0; k < c; ++k) {
      const double dz = ws.logits[k];
      double* gk = g + w2_off + k * h;
      const double* wk = p + w2_off + k * h;
      for (std::size_t j = 0; j < h; ++j) {
        gk[j] += dz * ws.hidden[j];
        dhidden[j] += dz * wk[j];
      }
      g[w2_off + c * h + k] += dz;
    }
    for (std::size_t j = 0; j < h; ++j) {
      const double da = dhidden[j] * (1.0 - ws.hidden[j] * ws.hidden[j]);
      double* gj = g + j * d;
      for (std::size_t i = 0; i < d; ++i) gj[i] += da * x[i];
      g[h * d + j] += da;
    }
  }
  out.loss *= inv;
  return out;
}

double evaluate_loss(const ModelSpec& spec, const ParamVector& w, const Batch& batch) {
  check_inputs(spec, w, batch);
  double total = 0.0;
  if (spec.kind == ModelKind::quadratic) {
    for (std::size_t r = 0; r < batch.rows(); ++r) total += quadratic_row_loss(spec, w, batch.row(r));
    return total / static_cast<double>(batch.rows());
  }
  Workspace ws;
  for (std::size_t r = 0; r < batch.rows(); ++r) {
    forward(spec, w, batch.row(r), ws);
    const double mx = *std::max_element(ws.logits.begin(), ws.logits.end());
    double sum = 0.0;
    for (double z : ws.logits) sum += std::exp(z - mx);
    total += mx + std::log(sum) - ws.logits[static_cast<std::size_t>(batch.labels[r])];
  }
  return total / static_cast<double>(batch.rows());
}

double accuracy(const ModelSpec& spec, const ParamVector& w, const Batch& data) {
  if (!spec.is_classifier()) throw ContractError("accuracy: quadratic model has no classes");
  check_inputs(spec, w, data);
  Workspace ws;
  std::size_t correct = 0;
  for (std::size_t r = 0; r < data.rows(); ++r) {
    forward(spec, w, data.row(r), ws);
    // max_element returns the first maximum, i.e. the lowest class index on ties.
    const auto pred = static_cast<std::size_t>(std::max_element(ws.logits.begin(), ws.logits.end()) - ws.logits.begin());
    if (pred == static_cast<std::size_t>(data.labels[r])) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.rows());
}

}  // namespace fedgh
