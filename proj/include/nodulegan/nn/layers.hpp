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

#include <random>
#include <string>
#include <vector>

#include "nodulegan/nn/tape.hpp"
#include "nodulegan/nn/tensor.hpp"

namespace nodulegan::nn {

enum class LayerKind { kConv2d, kConv2dTranspose, kBatchNorm, kFullyConnected, kActivation };

enum class ActivationKind { kRelu, kLeakyRelu, kTanh, kSigmoid };

struct Activation {
  ActivationKind kind = ActivationKind::kRelu;
  double alpha = 0.2;  // leaky_relu negative slope
};

struct LayerHyper {
  std::size_t stride = 1;
  std::size_t padding = 0;
  std::size_t kernel = 1;
  double epsilon = 1e-5;     // batchnorm
  double momentum = 0.1;     // batchnorm running-statistics update weight
  Activation activation{};   // activation layers only
};

/// Parameters of one layer.
///
/// Kernel layouts:
///   conv2d            (out_channels, in_channels, k, k)
///   conv2d_transpose  (in_channels, out_channels, k, k), i.e. the kernel of
///                     the convolution it is the adjoint of
///   fully_connected   (out_features, in_features)
///   batchnorm         gamma in `weights`, beta in `bias`, both (channels)
struct LayerParams {
  LayerKind kind = LayerKind::kActivation;
  TensorPtr weights;
  TensorPtr bias;
  LayerHyper hyper{};
  // Batchnorm only; not trained, updated by training-mode forwards.
  TensorPtr running_mean;
  TensorPtr running_var;
};

LayerParams make_conv2d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel,
                        std::size_t stride, std::size_t padding);
LayerParams make_conv2d_transpose(std::size_t in_channels, std::size_t out_channels,
                                  std::size_t kernel, std::size_t stride, std::size_t padding);
LayerParams make_batchnorm(std::size_t channels, double epsilon = 1e-5, double momentum = 0.1);
LayerParams make_fully_connected(std::size_t in_features, std::size_t out_features);
LayerParams make_activation(Activation activation);

/// Fills weights with N(0, stddev) and biases with zero; batchnorm gets
/// gamma ~ N(1, stddev), beta = 0.
void init_normal(LayerParams& layer, std::mt19937_64& rng, double stddev = 0.02);

std::size_t conv2d_output_extent(std::size_t in, std::size_t kernel, std::size_t stride,
                                 std::size_t padding);
std::size_t conv2d_transpose_output_extent(std::size_t in, std::size_t kernel, std::size_t stride,
                                           std::size_t padding);

TensorPtr conv2d_forward(Tape& tape, const TensorPtr& input, const LayerParams& params);
TensorPtr conv2d_transpose_forward(Tape& tape, const TensorPtr& input, const LayerParams& params);
TensorPtr batchnorm_forward(Tape& tape, const TensorPtr& input, const LayerParams& params,
                            bool training);
TensorPtr fully_connected_forward(Tape& tape, const TensorPtr& input, const LayerParams& params);
TensorPtr activation_forward(Tape& tape, const TensorPtr& input, Activation activation);

/// Dispatches on `params.kind`.
TensorPtr layer_forward(Tape& tape, const TensorPtr& input, const LayerParams& params,
                        bool training);

}  // namespace nodulegan::nn
