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

namespace nodulegan::gan {

/// Probabilities are clamped to [kProbabilityEps, 1 - kProbabilityEps]
/// before taking logs.
inline constexpr double kProbabilityEps = 1e-7;

/// -(mean log d_real + mean log(1 - d_fake)).
nn::TensorPtr discriminator_loss(nn::Tape& tape, const nn::TensorPtr& d_real, const nn::TensorPtr& d_fake);

/// Non-saturating generator objective: -mean log d_fake.
nn::TensorPtr generator_loss(nn::Tape& tape, const nn::TensorPtr& d_fake);

/// mean log d_real + mean log(1 - d_fake), the minimax value estimate.
double value_function_estimate(const nn::Tensor& d_real, const nn::Tensor& d_fake);

}  // namespace nodulegan::gan
