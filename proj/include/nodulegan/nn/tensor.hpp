/* Copyright 2026 The nodulegan Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <cstddef>
#include <initializer_list>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nodulegan::nn {

using Shape = std::vector<std::size_t>;

/// Raised for any shape, argument or state violation inside the engine.
class NnError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::size_t shape_numel(const Shape& shape);
std::string shape_to_string(const Shape& shape);

/// Dense row-major real array. Activations are laid out NCHW.
///
/// The gradient slot is empty until something accumulates into it; once
/// present it always has the same number of elements as the data.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor scalar(double value);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t numel() const { return data_.size(); }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  /// NCHW element access; only valid for rank-4 tensors.
  double& at(std::size_t n, std::size_t c, std::size_t h, std::size_t w);
  double at(std::size_t n, std::size_t c, std::size_t h, std::size_t w) const;

  bool has_grad() const { return !grad_.empty(); }
  std::span<double> grad();
  std::span<const double> grad() const;
  /// Allocates a zeroed gradient if none is attached yet.
  std::span<double> ensure_grad();
  void zero_grad();
  void clear_grad() { grad_.clear(); }

  bool requires_grad() const { return requires_grad_; }
  void set_requires_grad(bool value) { requires_grad_ = value; }

  /// Same data under a new shape with equal element count.
  void reshape(Shape shape);

  void fill(double value);

 private:
  Shape shape_;
  std::vector<double> data_;
  std::vector<double> grad_;
  bool requires_grad_ = false;
};

using TensorPtr = std::shared_ptr<Tensor>;

TensorPtr make_tensor(Shape shape, double fill = 0.0);
TensorPtr make_tensor(Shape shape, std::vector<double> data);
/// A tensor that participates in differentiation as a leaf.
TensorPtr make_parameter(Shape shape, double fill = 0.0);

/// Sum of elementwise products; shapes must agree.
double inner(const Tensor& a, const Tensor& b);

}  // namespace nodulegan::nn
