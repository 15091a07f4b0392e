#pragma once

#include <cstddef>
#include <cmath>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace permurank {

/// Dense row-major tensor of 64-bit reals. Everything in this library is
/// rank 0 (scalar), rank 1 (vector) or rank 2 (matrix).
class Tensor {
 public:
  Tensor() = default;

  Tensor(std::vector<int> shape, std::vector<double> values)
      : shape_(std::move(shape)), v_(std::move(values)) {
    if (numel_of(shape_) != v_.size()) {
      throw std::invalid_argument("Tensor: shape/value size mismatch");
    }
  }

  static Tensor zeros(std::vector<int> shape) {
    std::size_t n = numel_of(shape);
    return Tensor(std::move(shape), std::vector<double>(n, 0.0));
  }

  static Tensor full(std::vector<int> shape, double value) {
    std::size_t n = numel_of(shape);
    return Tensor(std::move(shape), std::vector<double>(n, value));
  }

  static Tensor scalar(double value) { return Tensor({}, {value}); }

  static Tensor row(std::vector<double> values) {
    int n = static_cast<int>(values.size());
    return Tensor({1, n}, std::move(values));
  }

  static Tensor column(std::vector<double> values) {
    int n = static_cast<int>(values.size());
    return Tensor({n, 1}, std::move(values));
  }

  const std::vector<int>& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  std::size_t numel() const { return v_.size(); }

  // Rank-2 accessors; rank-1 tensors are treated as a single row.
  int rows() const {
    if (shape_.empty()) return 1;
    return shape_.size() == 1 ? 1 : shape_[0];
  }
  int cols() const {
    if (shape_.empty()) return 1;
    return shape_.size() == 1 ? shape_[0] : shape_[1];
  }

  double& at(int r, int c) { return v_[static_cast<std::size_t>(r) * cols() + c]; }
  double at(int r, int c) const { return v_[static_cast<std::size_t>(r) * cols() + c]; }

  double& operator[](std::size_t i) { return v_[i]; }
  double operator[](std::size_t i) const { return v_[i]; }

  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }
  const std::vector<double>& values() const { return v_; }

  double scalar_value() const {
    if (v_.size() != 1) throw std::invalid_argument("Tensor: not a scalar");
    return v_[0];
  }

  bool all_finite() const {
    for (double x : v_) {
      if (!std::isfinite(x)) return false;
    }
    return true;
  }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

  bool operator==(const Tensor& other) const {
    return shape_ == other.shape_ && v_ == other.v_;
  }

  std::string shape_str() const {
    std::string s = "[";
    for (std::size_t i = 0; i < shape_.size(); ++i) {
      if (i) s += "x";
      s += std::to_string(shape_[i]);
    }
    return s + "]";
  }

 private:
  static std::size_t numel_of(const std::vector<int>& shape) {
    std::size_t n = 1;
    for (int d : shape) {
      if (d <= 0) throw std::invalid_argument("Tensor: non-positive dimension");
      n *= static_cast<std::size_t>(d);
    }
    return n;
  }

  std::vector<int> shape_;
  std::vector<double> v_;
};

}  // namespace permurank
