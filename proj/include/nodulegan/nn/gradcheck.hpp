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
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "nodulegan/nn/adam.hpp"
#include "nodulegan/nn/tape.hpp"

namespace nodulegan::nn {

struct GradcheckResult {
  std::string name;
  /// ||analytic - numeric||_2 / max(||analytic||_2, ||numeric||_2).
  double relative_error = 0.0;
  double tolerance = 0.0;
  bool passed() const { return relative_error < tolerance; }
};

/// Compares reverse-mode gradients of a scalar loss against central finite
/// differences for every tensor in `wrt`. `loss` must rebuild the graph from
/// scratch on each call; the numeric side runs it with recording disabled.
std::vector<GradcheckResult> gradcheck(const std::function<TensorPtr(Tape&)>& loss,
                                       std::span<const NamedParameter> wrt, double step,
                                       double tolerance);

/// Finite-difference checks for every layer kind and activation on random
/// tensors with at most 5x5 spatial extent.
std::vector<GradcheckResult> run_layer_gradchecks(std::uint64_t seed, double tolerance = 1e-5);

}  // namespace nodulegan::nn
