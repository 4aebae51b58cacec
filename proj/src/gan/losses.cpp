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

#include "nodulegan/gan/losses.hpp"

#include <algorithm>
#include <cmath>

#include "nodulegan/gan/networks.hpp"
#include "nodulegan/nn/ops.hpp"

namespace nodulegan::gan {

namespace {

void require_batch(const nn::Tensor& t, const char* what) {
  if (t.numel() == 0) throw GanError(std::string(what) + ": empty batch");
}

double clamped(double p) { return std::clamp(p, kProbabilityEps, 1.0 - kProbabilityEps); }

}  // namespace

nn::TensorPtr discriminator_loss(nn::Tape& tape, const nn::TensorPtr& d_real, const nn::TensorPtr& d_fake) {
  require_batch(*d_real, "discriminator_loss");
  require_batch(*d_fake, "discriminator_loss");
  return nn::add(tape, nn::neg_mean_log(tape, d_real, kProbabilityEps),
                 nn::neg_mean_log1m(tape, d_fake, kProbabilityEps));
}

nn::TensorPtr generator_loss(nn::Tape& tape, const nn::TensorPtr& d_fake) {
  require_batch(*d_fake, "generator_loss");
  return nn::neg_mean_log(tape, d_fake, kProbabilityEps);
}

double value_function_estimate(const nn::Tensor& d_real, const nn::Tensor& d_fake) {
  require_batch(d_real, "value_function_estimate");
  require_batch(d_fake, "value_function_estimate");
  double real_term = 0.0;
  for (double p : d_real.data()) real_term += std::log(clamped(p));
  double fake_term = 0.0;
  for (double p : d_fake.data()) fake_term += std::log(1.0 - clamped(p));
  return real_term / static_cast<double>(d_real.numel()) + fake_term / static_cast<double>(d_fake.numel());
}

}  // namespace nodulegan::gan
