#include "fedgh/paramvec.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fedgh/error.hpp"

namespace fedgh {
namespace {

void require_same_length(const ParamVector& a, const ParamVector& b, const char* op) {
  if (a.size() != b.size()) {
    throw ContractError(std::string(op) + ": length mismatch (" + std::to_string(a.size()) + " vs " +
                        std::to_string(b.size()) + ")");
  }
}

void require_finite(double v, const char* op) {
  if (!std::isfinite(v)) throw ContractError(std::string(op) + ": non-finite result");
}

ParamVector checked(ParamVector v, const char* op) {
  if (!v.all_finite()) throw ContractError(std::string(op) + ": non-finite result");
  return v;
}

}  // namespace

bool ParamVector::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double dot(const ParamVector& a, const ParamVector& b) {
  require_same_length(a, b, "dot");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  require_finite(acc, "dot");
  return acc;
}

double squared_norm(const ParamVector& a) {
  double acc = 0.0;
  for (double v : a) acc += v * v;
  require_finite(acc, "squared_norm");
  return acc;
}

double norm(const ParamVector& a) { return std::sqrt(squared_norm(a)); }

double cosine_similarity(const ParamVector& a, const ParamVector& b) {
  require_same_length(a, b, "cosine_similarity");
  const double na = norm(a);
  const double nb = norm(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
}

ParamVector project_out(const ParamVector& g, const ParamVector& frozen) {
  require_same_length(g, frozen, "project_out");
  const double denom = squared_norm(frozen);
  if (denom == 0.0) throw ContractError("project_out: zero-norm projection target");
  const double coeff = dot(g, frozen) / denom;
  ParamVector out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = g[i] - coeff * frozen[i];
  return checked(std::move(out), "project_out");
}

ParamVector axpy(double alpha, const ParamVector& x, const ParamVector& y) {
  require_same_length(x, y, "axpy");
  ParamVector out(y);
  for (std::size_t i = 0; i < x.size(); ++i) out[i] += alpha * x[i];
  return checked(std::move(out), "axpy");
}

ParamVector scale(double alpha, const ParamVector& x) {
  ParamVector out(x);
  for (double& v : out) v *= alpha;
  return checked(std::move(out), "scale");
}

ParamVector add(const ParamVector& a, const ParamVector& b) { return axpy(1.0, b, a); }

ParamVector sub(const ParamVector& a, const ParamVector& b) {
  require_same_length(a, b, "sub");
  ParamVector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return checked(std::move(out), "sub");
}

void axpy_inplace(double alpha, const ParamVector& x, ParamVector& y) {
  require_same_length(x, y, "axpy_inplace");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

}  // namespace fedgh
