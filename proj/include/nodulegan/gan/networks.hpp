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

#include <array>
#include <random>
#include <stdexcept>
#include <vector>

#include "nodulegan/nn/adam.hpp"
#include "nodulegan/nn/layers.hpp"

namespace nodulegan::gan {

class GanError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// z -> fully connected projection -> (C0, base, base) -> three transposed
/// convolutions. Defaults give 7 -> 14 -> 28 -> 56.
struct GeneratorConfig {
  std::size_t z_dim = 100;
  std::size_t base_size = 7;
  std::array<std::size_t, 3> channels{64, 32, 16};  // C0, then the two hidden widths
  std::size_t kernel = 4;
  std::size_t stride = 2;
  std::size_t padding = 1;
  std::size_t output_size = 56;

  void validate() const;
};

/// Two strided convolutions with leaky ReLU, flatten, fully connected head
/// with sigmoid. Defaults give 56 -> 28 -> 14 and a 14*14*16 = 3136 head.
struct DiscriminatorConfig {
  std::size_t input_size = 56;
  std::array<std::size_t, 2> channels{8, 16};
  std::size_t kernel = 4;
  std::size_t stride = 2;
  std::size_t padding = 1;
  double leaky_slope = 0.2;
  std::size_t head_input = 3136;

  std::size_t flatten_length() const;
  void validate() const;
};

class Generator {
 public:
  explicit Generator(GeneratorConfig config = {});

  void init(std::mt19937_64& rng, double stddev = 0.02);

  /// z: (N, z_dim). Returns (N, 1, output_size, output_size) in [-1, 1].
  nn::TensorPtr forward(nn::Tape& tape, const nn::TensorPtr& z, bool training) const;

  /// Trainable tensors, in a fixed order.
  std::vector<nn::NamedParameter> parameters() const;
  /// Trainable tensors plus batchnorm running statistics; what checkpoints hold.
  std::vector<nn::NamedParameter> state() const;

  const GeneratorConfig& config() const { return config_; }

 private:
  GeneratorConfig config_;
  nn::LayerParams project_;
  std::array<nn::LayerParams, 3> up_;
  std::array<nn::LayerParams, 3> norm_;  // after the projection and the first two up layers
};

class Discriminator {
 public:
  explicit Discriminator(DiscriminatorConfig config = {});

  void init(std::mt19937_64& rng, double stddev = 0.02);

  /// x: (N, 1, input_size, input_size). Returns (N, 1) probabilities.
  nn::TensorPtr forward(nn::Tape& tape, const nn::TensorPtr& x) const;
  /// The flattened features feeding the head, (N, flatten_length).
  nn::TensorPtr features(nn::Tape& tape, const nn::TensorPtr& x) const;

  std::vector<nn::NamedParameter> parameters() const;
  std::vector<nn::NamedParameter> state() const { return parameters(); }

  const DiscriminatorConfig& config() const { return config_; }

 private:
  DiscriminatorConfig config_;
  std::array<nn::LayerParams, 2> conv_;
  nn::LayerParams head_;
};

}  // namespace nodulegan::gan
