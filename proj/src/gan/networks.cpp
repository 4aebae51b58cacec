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

#include "nodulegan/gan/networks.hpp"

#include "nodulegan/nn/ops.hpp"

namespace nodulegan::gan {

using nn::Activation;
using nn::ActivationKind;
using nn::NamedParameter;
using nn::Tape;
using nn::TensorPtr;

namespace {

std::string geometry(std::size_t k, std::size_t s, std::size_t p) {
  return "kernel " + std::to_string(k) + ", stride " + std::to_string(s) + ", padding " + std::to_string(p);
}

}  // namespace

void GeneratorConfig::validate() const {
  if (z_dim == 0) throw GanError("generator: z_dim must be at least 1");
  for (std::size_t c : channels) {
    if (c == 0) throw GanError("generator: channel widths must be positive");
  }
  if (base_size == 0 || kernel == 0 || stride == 0) {
    throw GanError("generator: base size, kernel and stride must be positive");
  }
  std::size_t extent = base_size;
  for (int i = 0; i < 3; ++i) {
    if ((extent - 1) * stride + kernel < 2 * padding + 1) {
      throw GanError("generator: " + geometry(kernel, stride, padding) + " collapses a " +
                     std::to_string(extent) + "-pixel map");
    }
    extent = nn::conv2d_transpose_output_extent(extent, kernel, stride, padding);
  }
  if (extent != output_size) {
    throw GanError("generator: base " + std::to_string(base_size) + " with " + geometry(kernel, stride, padding) +
                   " reaches " + std::to_string(extent) + "x" + std::to_string(extent) + " after 3 layers, not " +
                   std::to_string(output_size) + "x" + std::to_string(output_size));
  }
}

std::size_t DiscriminatorConfig::flatten_length() const {
  std::size_t extent = input_size;
  for (int i = 0; i < 2; ++i) {
    if (extent + 2 * padding < kernel || stride == 0) return 0;
    extent = nn::conv2d_output_extent(extent, kernel, stride, padding);
  }
  return extent * extent * channels[1];
}

void DiscriminatorConfig::validate() const {
  if (channels[0] == 0 || channels[1] == 0) throw GanError("discriminator: channel widths must be positive");
  if (kernel == 0 || stride == 0) throw GanError("discriminator: kernel and stride must be positive");
  const std::size_t flat = flatten_length();
  if (flat == 0) throw GanError("discriminator: " + geometry(kernel, stride, padding) + " does not fit a " +
                                std::to_string(input_size) + "-pixel input");
  if (flat != head_input) {
    throw GanError("discriminator: flatten length " + std::to_string(flat) + " does not match head input " +
                   std::to_string(head_input));
  }
}

Generator::Generator(GeneratorConfig config) : config_(config) {
  config_.validate();
  const auto& c = config_.channels;
  project_ = nn::make_fully_connected(config_.z_dim, c[0] * config_.base_size * config_.base_size);
  const std::size_t widths[4] = {c[0], c[1], c[2], 1};
  for (std::size_t i = 0; i < 3; ++i) {
    up_[i] = nn::make_conv2d_transpose(widths[i], widths[i + 1], config_.kernel, config_.stride, config_.padding);
    norm_[i] = nn::make_batchnorm(widths[i]);
  }
  // A per-channel shift right before batchnorm is cancelled by the batch mean,
  // so the projection and the first two up layers carry no bias.
  project_.bias = nullptr;
  up_[0].bias = nullptr;
  up_[1].bias = nullptr;
}

void Generator::init(std::mt19937_64& rng, double stddev) {
  nn::init_normal(project_, rng, stddev);
  for (std::size_t i = 0; i < 3; ++i) {
    nn::init_normal(norm_[i], rng, stddev);
    nn::init_normal(up_[i], rng, stddev);
  }
}

TensorPtr Generator::forward(Tape& tape, const TensorPtr& z, bool training) const {
  if (z->rank() != 2 || z->dim(1) != config_.z_dim) {
    throw GanError("generator: expected latent batch (N, " + std::to_string(config_.z_dim) + "), got " +
                   nn::shape_to_string(z->shape()));
  }
  const Activation relu{ActivationKind::kRelu, 0.0};
  TensorPtr h = nn::fully_connected_forward(tape, z, project_);
  h = nn::reshape(tape, h, {z->dim(0), config_.channels[0], config_.base_size, config_.base_size});
  for (std::size_t i = 0; i < 3; ++i) {
    h = nn::batchnorm_forward(tape, h, norm_[i], training);
    h = nn::activation_forward(tape, h, relu);
    h = nn::conv2d_transpose_forward(tape, h, up_[i]);
  }
  return nn::activation_forward(tape, h, {ActivationKind::kTanh, 0.0});
}

std::vector<NamedParameter> Generator::parameters() const {
  std::vector<NamedParameter> out = {{"g.project.weight", project_.weights}};
  for (std::size_t i = 0; i < 3; ++i) {
    const std::string n = std::to_string(i);
    out.push_back({"g.norm" + n + ".gamma", norm_[i].weights});
    out.push_back({"g.norm" + n + ".beta", norm_[i].bias});
    out.push_back({"g.up" + n + ".weight", up_[i].weights});
    if (up_[i].bias) out.push_back({"g.up" + n + ".bias", up_[i].bias});
  }
  return out;
}

std::vector<NamedParameter> Generator::state() const {
  auto out = parameters();
  for (std::size_t i = 0; i < 3; ++i) {
    const std::string n = std::to_string(i);
    out.push_back({"g.norm" + n + ".running_mean", norm_[i].running_mean});
    out.push_back({"g.norm" + n + ".running_var", norm_[i].running_var});
  }
  return out;
}

Discriminator::Discriminator(DiscriminatorConfig config) : config_(config) {
  config_.validate();
  conv_[0] = nn::make_conv2d(1, config_.channels[0], config_.kernel, config_.stride, config_.padding);
  conv_[1] = nn::make_conv2d(config_.channels[0], config_.channels[1], config_.kernel, config_.stride,
                             config_.padding);
  head_ = nn::make_fully_connected(config_.head_input, 1);
}

void Discriminator::init(std::mt19937_64& rng, double stddev) {
  for (auto& c : conv_) nn::init_normal(c, rng, stddev);
  nn::init_normal(head_, rng, stddev);
}

TensorPtr Discriminator::features(Tape& tape, const TensorPtr& x) const {
  const std::size_t s = config_.input_size;
  if (x->rank() != 4 || x->dim(1) != 1 || x->dim(2) != s || x->dim(3) != s) {
    throw GanError("discriminator: expected (N, 1, " + std::to_string(s) + ", " + std::to_string(s) + "), got " +
                   nn::shape_to_string(x->shape()));
  }
  const Activation leaky{ActivationKind::kLeakyRelu, config_.leaky_slope};
  TensorPtr h = x;
  for (const auto& c : conv_) h = nn::activation_forward(tape, nn::conv2d_forward(tape, h, c), leaky);
  return nn::flatten(tape, h);
}

TensorPtr Discriminator::forward(Tape& tape, const TensorPtr& x) const {
  TensorPtr logits = nn::fully_connected_forward(tape, features(tape, x), head_);
  return nn::activation_forward(tape, logits, {ActivationKind::kSigmoid, 0.0});
}

std::vector<NamedParameter> Discriminator::parameters() const {
  return {{"d.conv0.weight", conv_[0].weights}, {"d.conv0.bias", conv_[0].bias},
          {"d.conv1.weight", conv_[1].weights}, {"d.conv1.bias", conv_[1].bias},
          {"d.head.weight", head_.weights},     {"d.head.bias", head_.bias}};
}

}  // namespace nodulegan::gan
