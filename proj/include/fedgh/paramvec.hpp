#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace fedgh {

/// Flat model parameters (or a gradient / update of the same shape).
///
/// Every model flattens layer by layer, weights row-major followed by biases,
/// so vectors from different clients of one architecture line up index by index.
/// Binary operations require equal lengths and throw ContractError otherwise;
/// results containing NaN or Inf are rejected the same way.
class ParamVector {
 public:
  ParamVector() = default;
  explicit ParamVector(std::size_t size, double fill = 0.0) : values_(size, fill) {}
  explicit ParamVector(std::vector<double> values) : values_(std::move(values)) {}
  ParamVector(std::initializer_list<double> values) : values_(values) {}

  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  double& operator[](std::size_t i) noexcept { return values_[i]; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

  std::span<double> span() noexcept { return values_; }
  std::span<const double> span() const noexcept { return values_; }
  const std::vector<double>& values() const noexcept { return values_; }

  auto begin() noexcept { return values_.begin(); }
  auto end() noexcept { return values_.end(); }
  auto begin() const noexcept { return values_.begin(); }
  auto end() const noexcept { return values_.end(); }

  bool all_finite() const noexcept;

  bool operator==(const ParamVector&) const = default;

 private:
  std::vector<double> values_;
};

/// Index-order double accumulation of a_i * b_i.
double dot(const ParamVector& a, const ParamVector& b);
double squared_norm(const ParamVector& a);
double norm(const ParamVector& a);

/// Cosine of the angle between a and b, clamped to [-1, 1]. Zero if either is the zero vector.
double cosine_similarity(const ParamVector& a, const ParamVector& b);

/// g minus its component along `frozen`. Requires norm(frozen) > 0.
ParamVector project_out(const ParamVector& g, const ParamVector& frozen);

/// y + alpha * x
ParamVector axpy(double alpha, const ParamVector& x, const ParamVector& y);
ParamVector scale(double alpha, const ParamVector& x);
ParamVector add(const ParamVector& a, const ParamVector& b);
ParamVector sub(const ParamVector& a, const ParamVector& b);

/// In-place y += alpha * x, for hot loops that own y.
void axpy_inplace(double alpha, const ParamVector& x, ParamVector& y);

}  // namespace fedgh
