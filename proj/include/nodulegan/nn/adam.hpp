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

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nodulegan/nn/tensor.hpp"

namespace nodulegan::nn {

struct NamedParameter {
  std::string name;
  TensorPtr tensor;
};

struct AdamOptions {
  double learning_rate = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// First/second moment estimates, one pair per parameter in registration
/// order. Moments are allocated lazily on the first step.
struct AdamState {
  explicit AdamState(AdamOptions options = {});

  AdamOptions options;
  std::uint64_t t = 0;
  std::vector<Tensor> m;
  std::vector<Tensor> v;
};

/// One bias-corrected Adam update using each parameter's gradient slot
/// (a missing slot counts as zero). All gradients are validated before any
/// parameter is touched; a non-finite entry throws NnError naming the
/// parameter and leaves parameters and state unchanged.
void adam_step(std::span<const NamedParameter> params, AdamState& state);

}  // namespace nodulegan::nn
