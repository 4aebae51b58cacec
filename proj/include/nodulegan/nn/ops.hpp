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

#include "nodulegan/nn/tape.hpp"
#include "nodulegan/nn/tensor.hpp"

// Shape plumbing and reductions that glue the layers into networks and losses.
namespace nodulegan::nn {

/// Copy with a new shape of equal element count.
TensorPtr reshape(Tape& tape, const TensorPtr& input, Shape shape);
/// (N, ...) -> (N, prod(...)).
TensorPtr flatten(Tape& tape, const TensorPtr& input);

TensorPtr sum(Tape& tape, const TensorPtr& input);
TensorPtr mean(Tape& tape, const TensorPtr& input);
TensorPtr add(Tape& tape, const TensorPtr& a, const TensorPtr& b);
TensorPtr scale(Tape& tape, const TensorPtr& input, double factor);
/// sum(input * weights) against a constant weight tensor of equal shape.
TensorPtr weighted_sum(Tape& tape, const TensorPtr& input, const Tensor& weights);

/// -mean(log(clamp(p, eps, 1 - eps))). Gradient is zero where clamped.
TensorPtr neg_mean_log(Tape& tape, const TensorPtr& probabilities, double eps);
/// -mean(log(1 - clamp(p, eps, 1 - eps))).
TensorPtr neg_mean_log1m(Tape& tape, const TensorPtr& probabilities, double eps);

}  // namespace nodulegan::nn
