/*
 * Copyright 2026 The dverec authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace dverec {

/// Numeric failure (non-finite value where a finite one is required).
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A required piece of state is missing or inconsistent (e.g. a parameter
/// without a gradient, a negative variance reaching a sampler).
struct StateError : std::logic_error {
  using std::logic_error::logic_error;
};

/// An id (node, user, item) that the receiver does not know.
struct LookupError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Scalar precision of a computation. Data is always carried in doubles;
/// f32 mode rounds every op output (and every parameter update) to the
/// nearest float, so values stay exactly float-representable end to end.
enum class Precision { f32, f64 };

inline double round_scalar(double v, Precision p) {
  return p == Precision::f32 ? static_cast<double>(static_cast<float>(v)) : v;
}

/// Dense row-major tensor of real scalars. Rank 1 and rank 2 cover every
/// shape this engine needs; rank-2 tensors are [rows, cols].
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<int64_t> shape, double fill = 0.0)
      : shape_(std::move(shape)), data_(checked_size(shape_), fill) {}

  Tensor(std::vector<int64_t> shape, std::vector<double> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    if (checked_size(shape_) != static_cast<int64_t>(data_.size()))
      throw std::invalid_argument("Tensor: shape/data size mismatch");
  }

  static Tensor scalar(double v) { return Tensor({1}, std::vector<double>{v}); }
  static Tensor vec(std::vector<double> v) {
    auto n = static_cast<int64_t>(v.size());
    return Tensor({n}, std::move(v));
  }
  static Tensor row(std::vector<double> v) {
    auto n = static_cast<int64_t>(v.size());
    return Tensor({1, n}, std::move(v));
  }
  static Tensor matrix(int64_t r, int64_t c, std::vector<double> data) {
    return Tensor({r, c}, std::move(data));
  }

  const std::vector<int64_t>& shape() const { return shape_; }
  int64_t rank() const { return static_cast<int64_t>(shape_.size()); }
  int64_t size() const { return static_cast<int64_t>(data_.size()); }
  int64_t rows() const { return rank() == 2 ? shape_[0] : 1; }
  int64_t cols() const { return rank() == 2 ? shape_[1] : (rank() == 1 ? shape_[0] : 0); }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  double at(int64_t i) const { return data_.at(static_cast<size_t>(i)); }
  double& at(int64_t i) { return data_.at(static_cast<size_t>(i)); }
  double operator()(int64_t r, int64_t c) const { return data_[r * shape_[1] + c]; }
  double& operator()(int64_t r, int64_t c) { return data_[r * shape_[1] + c]; }

  bool requires_grad() const { return requires_grad_; }
  Tensor& set_requires_grad(bool on = true) {
    requires_grad_ = on;
    return *this;
  }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  bool all_finite() const;

  /// Round every entry to the nearest float (no-op in f64).
  void round_to(Precision p) {
    if (p == Precision::f32)
      for (double& v : data_) v = static_cast<double>(static_cast<float>(v));
  }

  std::string shape_str() const;

 private:
  static int64_t checked_size(const std::vector<int64_t>& shape) {
    if (shape.empty()) throw std::invalid_argument("Tensor: empty shape");
    int64_t n = 1;
    for (int64_t d : shape) {
      if (d <= 0) throw std::invalid_argument("Tensor: non-positive dimension");
      n *= d;
    }
    return n;
  }

  std::vector<int64_t> shape_;
  std::vector<double> data_;
  bool requires_grad_ = false;
};

}  // namespace dverec
