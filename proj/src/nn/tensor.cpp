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

#include "nodulegan/nn/tensor.hpp"

#include <algorithm>
#include <sstream>

namespace nodulegan::nn {

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t extent : shape) n *= extent;
  return n;
}

std::string shape_to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

namespace {

void check_extents(const Shape& shape) {
  if (shape.empty()) throw NnError("tensor shape must have rank >= 1");
  for (std::size_t extent : shape) {
    if (extent == 0) throw NnError("tensor extents must be positive, got " + shape_to_string(shape));
  }
}

}  // namespace

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) {
  check_extents(shape_);
  data_.assign(shape_numel(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  check_extents(shape_);
  if (data_.size() != shape_numel(shape_)) {
    throw NnError("tensor data length " + std::to_string(data_.size()) +
                  " does not match shape " + shape_to_string(shape_));
  }
}

Tensor Tensor::scalar(double value) { return Tensor({1}, std::vector<double>{value}); }

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= shape_.size()) throw NnError("axis out of range for " + shape_to_string(shape_));
  return shape_[axis];
}

double& Tensor::at(std::size_t n, std::size_t c, std::size_t h, std::size_t w) {
  return data_[((n * shape_[1] + c) * shape_[2] + h) * shape_[3] + w];
}

double Tensor::at(std::size_t n, std::size_t c, std::size_t h, std::size_t w) const {
  return data_[((n * shape_[1] + c) * shape_[2] + h) * shape_[3] + w];
}

std::span<double> Tensor::grad() {
  if (grad_.empty()) throw NnError("tensor " + shape_to_string(shape_) + " has no gradient");
  return grad_;
}

std::span<const double> Tensor::grad() const {
  if (grad_.empty()) throw NnError("tensor " + shape_to_string(shape_) + " has no gradient");
  return grad_;
}

std::span<double> Tensor::ensure_grad() {
  if (grad_.empty()) grad_.assign(data_.size(), 0.0);
  return grad_;
}

void Tensor::zero_grad() {
  if (!grad_.empty()) std::fill(grad_.begin(), grad_.end(), 0.0);
}

void Tensor::reshape(Shape shape) {
  check_extents(shape);
  if (shape_numel(shape) != data_.size()) {
    throw NnError("cannot reshape " + shape_to_string(shape_) + " to " + shape_to_string(shape));
  }
  shape_ = std::move(shape);
}

void Tensor::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

TensorPtr make_tensor(Shape shape, double fill) {
  return std::make_shared<Tensor>(std::move(shape), fill);
}

TensorPtr make_tensor(Shape shape, std::vector<double> data) {
  return std::make_shared<Tensor>(std::move(shape), std::move(data));
}

TensorPtr make_parameter(Shape shape, double fill) {
  auto t = make_tensor(std::move(shape), fill);
  t->set_requires_grad(true);
  return t;
}

double inner(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw NnError("inner product shape mismatch: " + shape_to_string(a.shape()) + " vs " +
                  shape_to_string(b.shape()));
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < a.numel(); ++i) acc += a[i] * b[i];
  return acc;
}

}  // namespace nodulegan::nn
