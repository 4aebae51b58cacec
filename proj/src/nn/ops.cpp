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

#include "nodulegan/nn/ops.hpp"

#include <algorithm>
#include <cmath>

namespace nodulegan::nn {

namespace {

// Records `local_grad(i) * dy` accumulation for an elementwise/reduction op
// whose output is a single scalar.
template <typename LocalGrad>
void record_scalar_reduction(Tape& tape, const TensorPtr& input, const TensorPtr& output,
                             LocalGrad local_grad) {
  if (!tape.recording() || !input->requires_grad()) return;
  output->set_requires_grad(true);
  tape.record([input, output, local_grad] {
    if (!output->has_grad()) return;
    const double dy = output->grad()[0];
    auto dx = input->ensure_grad();
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += local_grad(i) * dy;
  });
}

}  // namespace

TensorPtr reshape(Tape& tape, const TensorPtr& input, Shape shape) {
  auto output = make_tensor(input->shape());
  std::copy(input->data().begin(), input->data().end(), output->data().begin());
  output->reshape(std::move(shape));
  if (tape.recording() && input->requires_grad()) {
    output->set_requires_grad(true);
    tape.record([input, output] {
      if (!output->has_grad()) return;
      const auto dy = output->grad();
      auto dx = input->ensure_grad();
      for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += dy[i];
    });
  }
  return output;
}

TensorPtr flatten(Tape& tape, const TensorPtr& input) {
  const std::size_t batch = input->dim(0);
  return reshape(tape, input, {batch, input->numel() / batch});
}

TensorPtr sum(Tape& tape, const TensorPtr& input) {
  double acc = 0.0;
  for (double v : input->data()) acc += v;
  auto output = make_tensor({1}, acc);
  record_scalar_reduction(tape, input, output, [](std::size_t) { return 1.0; });
  return output;
}

TensorPtr mean(Tape& tape, const TensorPtr& input) {
  const double n = static_cast<double>(input->numel());
  double acc = 0.0;
  for (double v : input->data()) acc += v;
  auto output = make_tensor({1}, acc / n);
  record_scalar_reduction(tape, input, output, [n](std::size_t) { return 1.0 / n; });
  return output;
}

TensorPtr add(Tape& tape, const TensorPtr& a, const TensorPtr& b) {
  if (a->shape() != b->shape()) {
    throw NnError("add: shape mismatch " + shape_to_string(a->shape()) + " vs " +
                  shape_to_string(b->shape()));
  }
  auto output = make_tensor(a->shape());
  for (std::size_t i = 0; i < output->numel(); ++i) (*output)[i] = (*a)[i] + (*b)[i];
  if (tape.recording() && (a->requires_grad() || b->requires_grad())) {
    output->set_requires_grad(true);
    tape.record([a, b, output] {
      if (!output->has_grad()) return;
      const auto dy = output->grad();
      for (const TensorPtr& t : {a, b}) {
        if (!t->requires_grad()) continue;
        auto dx = t->ensure_grad();
        for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += dy[i];
      }
    });
  }
  return output;
}

TensorPtr scale(Tape& tape, const TensorPtr& input, double factor) {
  auto output = make_tensor(input->shape());
  for (std::size_t i = 0; i < output->numel(); ++i) (*output)[i] = (*input)[i] * factor;
  if (tape.recording() && input->requires_grad()) {
    output->set_requires_grad(true);
    tape.record([input, output, factor] {
      if (!output->has_grad()) return;
      const auto dy = output->grad();
      auto dx = input->ensure_grad();
      for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += factor * dy[i];
    });
  }
  return output;
}

TensorPtr weighted_sum(Tape& tape, const TensorPtr& input, const Tensor& weights) {
  if (input->shape() != weights.shape()) {
    throw NnError("weighted_sum: shape mismatch " + shape_to_string(input->shape()) + " vs " +
                  shape_to_string(weights.shape()));
  }
  auto output = make_tensor({1}, inner(*input, weights));
  auto w = std::make_shared<Tensor>(weights);
  record_scalar_reduction(tape, input, output, [w](std::size_t i) { return (*w)[i]; });
  return output;
}

TensorPtr neg_mean_log(Tape& tape, const TensorPtr& probabilities, double eps) {
  const auto p = probabilities->data();
  const double n = static_cast<double>(p.size());
  double acc = 0.0;
  for (double v : p) acc += std::log(std::clamp(v, eps, 1.0 - eps));
  auto output = make_tensor({1}, -acc / n);
  record_scalar_reduction(tape, probabilities, output, [probabilities, eps, n](std::size_t i) {
    const double v = (*probabilities)[i];
    if (v < eps || v > 1.0 - eps) return 0.0;
    return -1.0 / (n * v);
  });
  return output;
}

TensorPtr neg_mean_log1m(Tape& tape, const TensorPtr& probabilities, double eps) {
  const auto p = probabilities->data();
  const double n = static_cast<double>(p.size());
  double acc = 0.0;
  for (double v : p) acc += std::log(1.0 - std::clamp(v, eps, 1.0 - eps));
  auto output = make_tensor({1}, -acc / n);
  record_scalar_reduction(tape, probabilities, output, [probabilities, eps, n](std::size_t i) {
    const double v = (*probabilities)[i];
    if (v < eps || v > 1.0 - eps) return 0.0;
    return 1.0 / (n * (1.0 - v));
  });
  return output;
}

}  // namespace nodulegan::nn
