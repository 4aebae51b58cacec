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

#include "nodulegan/nn/adam.hpp"

#include <cmath>

namespace nodulegan::nn {

AdamState::AdamState(AdamOptions opts) : options(opts) {
  if (!(options.beta1 > 0.0 && options.beta1 < 1.0) ||
      !(options.beta2 > 0.0 && options.beta2 < 1.0)) {
    throw NnError("adam: beta1 and beta2 must lie in (0,1)");
  }
  if (!(options.learning_rate > 0.0) || !(options.epsilon > 0.0)) {
    throw NnError("adam: learning rate and epsilon must be positive");
  }
}

void adam_step(std::span<const NamedParameter> params, AdamState& state) {
  if (state.m.empty()) {
    for (const auto& p : params) {
      state.m.emplace_back(p.tensor->shape(), 0.0);
      state.v.emplace_back(p.tensor->shape(), 0.0);
    }
  }
  if (state.m.size() != params.size()) {
    throw NnError("adam: state tracks " + std::to_string(state.m.size()) + " parameters, got " +
                  std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Tensor& p = *params[i].tensor;
    if (p.shape() != state.m[i].shape()) {
      throw NnError("adam: parameter '" + params[i].name + "' has shape " +
                    shape_to_string(p.shape()) + ", moments have " +
                    shape_to_string(state.m[i].shape()));
    }
    if (!p.has_grad()) continue;
    for (double g : p.grad()) {
      if (!std::isfinite(g)) throw NnError("adam: non-finite gradient in parameter '" + params[i].name + "'");
    }
  }

  ++state.t;
  const auto& o = state.options;
  const double t = static_cast<double>(state.t);
  const double correction1 = 1.0 - std::pow(o.beta1, t);
  const double correction2 = 1.0 - std::pow(o.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i].tensor;
    auto m = state.m[i].data();
    auto v = state.v[i].data();
    auto w = p.data();
    const bool has_grad = p.has_grad();
    for (std::size_t k = 0; k < w.size(); ++k) {
      const double g = has_grad ? p.grad()[k] : 0.0;
      m[k] = o.beta1 * m[k] + (1.0 - o.beta1) * g;
      v[k] = o.beta2 * v[k] + (1.0 - o.beta2) * g * g;
      const double m_hat = m[k] / correction1;
      const double v_hat = v[k] / correction2;
      w[k] -= o.learning_rate * m_hat / (std::sqrt(v_hat) + o.epsilon);
    }
  }
}

}  // namespace nodulegan::nn
