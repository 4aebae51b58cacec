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

#include "nodulegan/nn/layers.hpp"

#include <Eigen/Core>
#include <cmath>

namespace nodulegan::nn {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;

// Left-to-right sum. Eigen's vectorized reductions peel by address alignment,
// which makes the rounding depend on where the allocator put the buffer.
double serial_sum(const double* p, std::size_t n, std::size_t stride = 1) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += p[i * stride];
  return s;
}

struct ConvGeometry {
  std::size_t channels;  // channels of the dense (image) side
  std::size_t height;
  std::size_t width;
  std::size_t kernel;
  std::size_t stride;
  std::size_t padding;
  std::size_t out_height;  // extent of the strided (column) side
  std::size_t out_width;

  std::size_t col_rows() const { return channels * kernel * kernel; }
  std::size_t col_cols() const { return out_height * out_width; }
};

// Unfolds one image (C, H, W) into columns (C*k*k, OH*OW).
void im2col(const double* image, const ConvGeometry& g, double* cols) {
  const auto pad = static_cast<std::ptrdiff_t>(g.padding);
  const auto h_in = static_cast<std::ptrdiff_t>(g.height);
  const auto w_in = static_cast<std::ptrdiff_t>(g.width);
  std::size_t row = 0;
  for (std::size_t c = 0; c < g.channels; ++c) {
    const double* plane = image + c * g.height * g.width;
    for (std::size_t ki = 0; ki < g.kernel; ++ki) {
      for (std::size_t kj = 0; kj < g.kernel; ++kj, ++row) {
        double* out = cols + row * g.col_cols();
        for (std::size_t oh = 0; oh < g.out_height; ++oh) {
          const auto ih = static_cast<std::ptrdiff_t>(oh * g.stride + ki) - pad;
          for (std::size_t ow = 0; ow < g.out_width; ++ow) {
            const auto iw = static_cast<std::ptrdiff_t>(ow * g.stride + kj) - pad;
            *out++ = (ih >= 0 && ih < h_in && iw >= 0 && iw < w_in)
                         ? plane[static_cast<std::size_t>(ih) * g.width + static_cast<std::size_t>(iw)]
                         : 0.0;
          }
        }
      }
    }
  }
}

// Adjoint of im2col: scatters columns back onto the image, accumulating.
void col2im(const double* cols, const ConvGeometry& g, double* image) {
  const auto pad = static_cast<std::ptrdiff_t>(g.padding);
  const auto h_in = static_cast<std::ptrdiff_t>(g.height);
  const auto w_in = static_cast<std::ptrdiff_t>(g.width);
  std::size_t row = 0;
  for (std::size_t c = 0; c < g.channels; ++c) {
    double* plane = image + c * g.height * g.width;
    for (std::size_t ki = 0; ki < g.kernel; ++ki) {
      for (std::size_t kj = 0; kj < g.kernel; ++kj, ++row) {
        const double* in = cols + row * g.col_cols();
        for (std::size_t oh = 0; oh < g.out_height; ++oh) {
          const auto ih = static_cast<std::ptrdiff_t>(oh * g.stride + ki) - pad;
          for (std::size_t ow = 0; ow < g.out_width; ++ow, ++in) {
            const auto iw = static_cast<std::ptrdiff_t>(ow * g.stride + kj) - pad;
            if (ih >= 0 && ih < h_in && iw >= 0 && iw < w_in) {
              plane[static_cast<std::size_t>(ih) * g.width + static_cast<std::size_t>(iw)] += *in;
            }
          }
        }
      }
    }
  }
}

void require_kind(const LayerParams& params, LayerKind kind, const char* op) {
  if (params.kind != kind) throw NnError(std::string(op) + ": layer parameters of the wrong kind");
}

void require_conv_hyper(const LayerHyper& hyper, const char* op) {
  if (hyper.stride < 1) throw NnError(std::string(op) + ": stride must be >= 1");
  if (hyper.kernel < 1) throw NnError(std::string(op) + ": kernel must be >= 1");
}

void check_conv_shapes(const Tensor& input, const Tensor& kernel, std::size_t kernel_in_axis,
                       const char* op) {
  const auto mismatch = [&](const std::string& why) {
    return NnError(std::string(op) + ": " + why + "; input " + shape_to_string(input.shape()) +
                   ", kernel " + shape_to_string(kernel.shape()));
  };
  if (input.rank() != 4) throw mismatch("input must be NCHW");
  if (kernel.rank() != 4) throw mismatch("kernel must be 4-dimensional");
  if (kernel.dim(2) != kernel.dim(3)) throw mismatch("kernel must be square");
  if (input.dim(1) != kernel.dim(kernel_in_axis)) throw mismatch("channel count mismatch");
}

bool any_requires_grad(std::initializer_list<const TensorPtr*> tensors) {
  for (const TensorPtr* t : tensors) {
    if (*t && (*t)->requires_grad()) return true;
  }
  return false;
}

double apply_activation(ActivationKind kind, double alpha, double x) {
  switch (kind) {
    case ActivationKind::kRelu:
      return x > 0.0 ? x : 0.0;
    case ActivationKind::kLeakyRelu:
      return x > 0.0 ? x : alpha * x;
    case ActivationKind::kTanh:
      return std::tanh(x);
    case ActivationKind::kSigmoid:
      return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
  }
  return x;
}

}  // namespace

std::size_t conv2d_output_extent(std::size_t in, std::size_t kernel, std::size_t stride,
                                 std::size_t padding) {
  if (stride < 1) throw NnError("stride must be >= 1");
  if (in + 2 * padding < kernel) {
    throw NnError("kernel " + std::to_string(kernel) + " larger than padded extent " +
                  std::to_string(in + 2 * padding));
  }
  return (in + 2 * padding - kernel) / stride + 1;
}

std::size_t conv2d_transpose_output_extent(std::size_t in, std::size_t kernel, std::size_t stride,
                                           std::size_t padding) {
  if (stride < 1) throw NnError("stride must be >= 1");
  const std::size_t grown = (in - 1) * stride + kernel;
  if (grown <= 2 * padding) throw NnError("transposed convolution output would be empty");
  return grown - 2 * padding;
}

LayerParams make_conv2d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel,
                        std::size_t stride, std::size_t padding) {
  LayerParams p;
  p.kind = LayerKind::kConv2d;
  p.weights = make_parameter({out_channels, in_channels, kernel, kernel});
  p.bias = make_parameter({out_channels});
  p.hyper.kernel = kernel;
  p.hyper.stride = stride;
  p.hyper.padding = padding;
  return p;
}

LayerParams make_conv2d_transpose(std::size_t in_channels, std::size_t out_channels,
                                  std::size_t kernel, std::size_t stride, std::size_t padding) {
  LayerParams p;
  p.kind = LayerKind::kConv2dTranspose;
  p.weights = make_parameter({in_channels, out_channels, kernel, kernel});
  p.bias = make_parameter({out_channels});
  p.hyper.kernel = kernel;
  p.hyper.stride = stride;
  p.hyper.padding = padding;
  return p;
}

LayerParams make_batchnorm(std::size_t channels, double epsilon, double momentum) {
  LayerParams p;
  p.kind = LayerKind::kBatchNorm;
  p.weights = make_parameter({channels}, 1.0);
  p.bias = make_parameter({channels}, 0.0);
  p.running_mean = make_tensor({channels}, 0.0);
  p.running_var = make_tensor({channels}, 1.0);
  p.hyper.epsilon = epsilon;
  p.hyper.momentum = momentum;
  return p;
}

LayerParams make_fully_connected(std::size_t in_features, std::size_t out_features) {
  LayerParams p;
  p.kind = LayerKind::kFullyConnected;
  p.weights = make_parameter({out_features, in_features});
  p.bias = make_parameter({out_features});
  return p;
}

LayerParams make_activation(Activation activation) {
  LayerParams p;
  p.kind = LayerKind::kActivation;
  p.hyper.activation = activation;
  return p;
}

void init_normal(LayerParams& layer, std::mt19937_64& rng, double stddev) {
  if (layer.kind == LayerKind::kActivation) return;
  const double center = layer.kind == LayerKind::kBatchNorm ? 1.0 : 0.0;
  std::normal_distribution<double> dist(center, stddev);
  for (double& w : layer.weights->data()) w = dist(rng);
  if (layer.bias) layer.bias->fill(0.0);
}

TensorPtr conv2d_forward(Tape& tape, const TensorPtr& input, const LayerParams& params) {
  require_kind(params, LayerKind::kConv2d, "conv2d");
  require_conv_hyper(params.hyper, "conv2d");
  const Tensor& kernel = *params.weights;
  check_conv_shapes(*input, kernel, 1, "conv2d");
  if (kernel.dim(2) != params.hyper.kernel) throw NnError("conv2d: kernel extent disagrees with hyper");

  const std::size_t batch = input->dim(0);
  const std::size_t out_channels = kernel.dim(0);
  ConvGeometry g{input->dim(1),
                 input->dim(2),
                 input->dim(3),
                 params.hyper.kernel,
                 params.hyper.stride,
                 params.hyper.padding,
                 conv2d_output_extent(input->dim(2), params.hyper.kernel, params.hyper.stride,
                                      params.hyper.padding),
                 conv2d_output_extent(input->dim(3), params.hyper.kernel, params.hyper.stride,
                                      params.hyper.padding)};

  auto output = make_tensor({batch, out_channels, g.out_height, g.out_width});
  const std::size_t in_stride = g.channels * g.height * g.width;
  const std::size_t out_stride = out_channels * g.col_cols();
  auto cols = std::make_shared<std::vector<double>>(batch * g.col_rows() * g.col_cols());

  ConstMatrixMap w(kernel.data().data(), static_cast<Eigen::Index>(out_channels),
                   static_cast<Eigen::Index>(g.col_rows()));
  for (std::size_t n = 0; n < batch; ++n) {
    double* col = cols->data() + n * g.col_rows() * g.col_cols();
    im2col(input->data().data() + n * in_stride, g, col);
    ConstMatrixMap c(col, static_cast<Eigen::Index>(g.col_rows()),
                     static_cast<Eigen::Index>(g.col_cols()));
    MatrixMap y(output->data().data() + n * out_stride, static_cast<Eigen::Index>(out_channels),
                static_cast<Eigen::Index>(g.col_cols()));
    y.noalias() = w * c;
    if (params.bias) {
      for (std::size_t o = 0; o < out_channels; ++o) y.row(static_cast<Eigen::Index>(o)).array() += (*params.bias)[o];
    }
  }

  const TensorPtr weights = params.weights;
  const TensorPtr bias = params.bias;
  if (tape.recording() && any_requires_grad({&input, &weights, &bias})) {
    output->set_requires_grad(true);
    tape.record([input, weights, bias, output, cols, g, batch, out_channels, in_stride,
                 out_stride] {
      if (!output->has_grad()) return;
      const double* dy_all = output->grad().data();
      ConstMatrixMap w(weights->data().data(), static_cast<Eigen::Index>(out_channels),
                       static_cast<Eigen::Index>(g.col_rows()));
      std::vector<double> dcol(g.col_rows() * g.col_cols());
      for (std::size_t n = 0; n < batch; ++n) {
        ConstMatrixMap dy(dy_all + n * out_stride, static_cast<Eigen::Index>(out_channels),
                          static_cast<Eigen::Index>(g.col_cols()));
        ConstMatrixMap c(cols->data() + n * g.col_rows() * g.col_cols(),
                         static_cast<Eigen::Index>(g.col_rows()),
                         static_cast<Eigen::Index>(g.col_cols()));
        if (weights->requires_grad()) {
          MatrixMap dw(weights->ensure_grad().data(), static_cast<Eigen::Index>(out_channels),
                       static_cast<Eigen::Index>(g.col_rows()));
          dw.noalias() += dy * c.transpose();
        }
        if (bias && bias->requires_grad()) {
          auto db = bias->ensure_grad();
          for (std::size_t o = 0; o < out_channels; ++o) db[o] += serial_sum(dy.row(static_cast<Eigen::Index>(o)).data(), g.col_cols());
        }
        if (input->requires_grad()) {
          MatrixMap dc(dcol.data(), static_cast<Eigen::Index>(g.col_rows()),
                       static_cast<Eigen::Index>(g.col_cols()));
          dc.noalias() = w.transpose() * dy;
          col2im(dcol.data(), g, input->ensure_grad().data() + n * in_stride);
        }
      }
    });
  }
  return output;
}

TensorPtr conv2d_transpose_forward(Tape& tape, const TensorPtr& input, const LayerParams& params) {
  require_kind(params, LayerKind::kConv2dTranspose, "conv2d_transpose");
  require_conv_hyper(params.hyper, "conv2d_transpose");
  const Tensor& kernel = *params.weights;
  check_conv_shapes(*input, kernel, 0, "conv2d_transpose");
  if (kernel.dim(2) != params.hyper.kernel) {
    throw NnError("conv2d_transpose: kernel extent disagrees with hyper");
  }

  const std::size_t batch = input->dim(0);
  const std::size_t in_channels = kernel.dim(0);
  const std::size_t out_channels = kernel.dim(1);
  const std::size_t out_h = conv2d_transpose_output_extent(input->dim(2), params.hyper.kernel,
                                                           params.hyper.stride, params.hyper.padding);
  const std::size_t out_w = conv2d_transpose_output_extent(input->dim(3), params.hyper.kernel,
                                                           params.hyper.stride, params.hyper.padding);
  // Geometry of the forward convolution this op is the adjoint of: the dense
  // side is our output, the column side is our input.
  ConvGeometry g{out_channels, out_h, out_w, params.hyper.kernel, params.hyper.stride,
                 params.hyper.padding, input->dim(2), input->dim(3)};

  auto output = make_tensor({batch, out_channels, out_h, out_w});
  const std::size_t in_stride = in_channels * g.col_cols();
  const std::size_t out_stride = out_channels * out_h * out_w;
  std::vector<double> col(g.col_rows() * g.col_cols());

  ConstMatrixMap k(kernel.data().data(), static_cast<Eigen::Index>(in_channels),
                   static_cast<Eigen::Index>(g.col_rows()));
  for (std::size_t n = 0; n < batch; ++n) {
    ConstMatrixMap x(input->data().data() + n * in_stride, static_cast<Eigen::Index>(in_channels),
                     static_cast<Eigen::Index>(g.col_cols()));
    MatrixMap c(col.data(), static_cast<Eigen::Index>(g.col_rows()),
                static_cast<Eigen::Index>(g.col_cols()));
    c.noalias() = k.transpose() * x;
    double* y = output->data().data() + n * out_stride;
    col2im(col.data(), g, y);
    if (params.bias) {
      for (std::size_t o = 0; o < out_channels; ++o) {
        const double b = (*params.bias)[o];
        for (std::size_t i = 0; i < out_h * out_w; ++i) y[o * out_h * out_w + i] += b;
      }
    }
  }

  const TensorPtr weights = params.weights;
  const TensorPtr bias = params.bias;
  if (tape.recording() && any_requires_grad({&input, &weights, &bias})) {
    output->set_requires_grad(true);
    tape.record([input, weights, bias, output, g, batch, in_channels, out_channels, in_stride,
                 out_stride] {
      if (!output->has_grad()) return;
      const double* dy_all = output->grad().data();
      ConstMatrixMap k(weights->data().data(), static_cast<Eigen::Index>(in_channels),
                       static_cast<Eigen::Index>(g.col_rows()));
      std::vector<double> dcol(g.col_rows() * g.col_cols());
      const std::size_t plane = g.height * g.width;
      for (std::size_t n = 0; n < batch; ++n) {
        const double* dy = dy_all + n * out_stride;
        im2col(dy, g, dcol.data());
        ConstMatrixMap dc(dcol.data(), static_cast<Eigen::Index>(g.col_rows()),
                          static_cast<Eigen::Index>(g.col_cols()));
        if (input->requires_grad()) {
          MatrixMap dx(input->ensure_grad().data() + n * in_stride,
                       static_cast<Eigen::Index>(in_channels),
                       static_cast<Eigen::Index>(g.col_cols()));
          dx.noalias() += k * dc;
        }
        if (weights->requires_grad()) {
          ConstMatrixMap x(input->data().data() + n * in_stride,
                           static_cast<Eigen::Index>(in_channels),
                           static_cast<Eigen::Index>(g.col_cols()));
          MatrixMap dk(weights->ensure_grad().data(), static_cast<Eigen::Index>(in_channels),
                       static_cast<Eigen::Index>(g.col_rows()));
          dk.noalias() += x * dc.transpose();
        }
        if (bias && bias->requires_grad()) {
          auto db = bias->ensure_grad();
          for (std::size_t o = 0; o < out_channels; ++o) {
            double acc = 0.0;
            for (std::size_t i = 0; i < plane; ++i) acc += dy[o * plane + i];
            db[o] += acc;
          }
        }
      }
    });
  }
  return output;
}

TensorPtr batchnorm_forward(Tape& tape, const TensorPtr& input, const LayerParams& params,
                            bool training) {
  require_kind(params, LayerKind::kBatchNorm, "batchnorm");
  const Tensor& x = *input;
  if (x.rank() != 2 && x.rank() != 4) {
    throw NnError("batchnorm: expected (N,C) or NCHW input, got " + shape_to_string(x.shape()));
  }
  const std::size_t batch = x.dim(0);
  const std::size_t channels = x.dim(1);
  const std::size_t plane = x.rank() == 4 ? x.dim(2) * x.dim(3) : 1;
  if (batch == 0) throw NnError("batchnorm: empty batch");
  if (params.weights->numel() != channels || params.bias->numel() != channels) {
    throw NnError("batchnorm: gamma/beta length " + std::to_string(params.weights->numel()) +
                  " does not match channel count of input " + shape_to_string(x.shape()));
  }
  const double eps = params.hyper.epsilon;
  const double count = static_cast<double>(batch * plane);

  auto output = make_tensor(x.shape());
  auto xhat = std::make_shared<std::vector<double>>(x.numel());
  auto inv_std = std::make_shared<std::vector<double>>(channels);
  const auto idx = [&](std::size_t n, std::size_t c, std::size_t i) {
    return (n * channels + c) * plane + i;
  };

  for (std::size_t c = 0; c < channels; ++c) {
    double mu;
    double var;
    if (training) {
      double acc = 0.0;
      for (std::size_t n = 0; n < batch; ++n)
        for (std::size_t i = 0; i < plane; ++i) acc += x[idx(n, c, i)];
      mu = acc / count;
      double sq = 0.0;
      for (std::size_t n = 0; n < batch; ++n)
        for (std::size_t i = 0; i < plane; ++i) {
          const double d = x[idx(n, c, i)] - mu;
          sq += d * d;
        }
      var = sq / count;
      if (params.running_mean && params.running_var) {
        const double m = params.hyper.momentum;
        const double unbiased = count > 1.0 ? sq / (count - 1.0) : var;
        (*params.running_mean)[c] = (1.0 - m) * (*params.running_mean)[c] + m * mu;
        (*params.running_var)[c] = (1.0 - m) * (*params.running_var)[c] + m * unbiased;
      }
    } else {
      if (!params.running_mean || !params.running_var) {
        throw NnError("batchnorm: inference mode requires running statistics");
      }
      mu = (*params.running_mean)[c];
      var = (*params.running_var)[c];
    }
    const double is = 1.0 / std::sqrt(var + eps);
    (*inv_std)[c] = is;
    const double gamma = (*params.weights)[c];
    const double beta = (*params.bias)[c];
    for (std::size_t n = 0; n < batch; ++n)
      for (std::size_t i = 0; i < plane; ++i) {
        const std::size_t k = idx(n, c, i);
        (*xhat)[k] = (x[k] - mu) * is;
        (*output)[k] = gamma * (*xhat)[k] + beta;
      }
  }

  const TensorPtr gamma = params.weights;
  const TensorPtr beta = params.bias;
  if (tape.recording() && any_requires_grad({&input, &gamma, &beta})) {
    output->set_requires_grad(true);
    tape.record([input, gamma, beta, output, xhat, inv_std, batch, channels, plane, count,
                 training] {
      if (!output->has_grad()) return;
      auto dy = output->grad();
      const auto idx = [&](std::size_t n, std::size_t c, std::size_t i) {
        return (n * channels + c) * plane + i;
      };
      for (std::size_t c = 0; c < channels; ++c) {
        double sum_dy = 0.0;
        double sum_dy_xhat = 0.0;
        for (std::size_t n = 0; n < batch; ++n)
          for (std::size_t i = 0; i < plane; ++i) {
            const std::size_t k = idx(n, c, i);
            sum_dy += dy[k];
            sum_dy_xhat += dy[k] * (*xhat)[k];
          }
        if (gamma->requires_grad()) gamma->ensure_grad()[c] += sum_dy_xhat;
        if (beta->requires_grad()) beta->ensure_grad()[c] += sum_dy;
        if (!input->requires_grad()) continue;
        auto dx = input->ensure_grad();
        const double g = (*gamma)[c];
        const double is = (*inv_std)[c];
        for (std::size_t n = 0; n < batch; ++n)
          for (std::size_t i = 0; i < plane; ++i) {
            const std::size_t k = idx(n, c, i);
            if (training) {
              dx[k] += g * is / count * (count * dy[k] - sum_dy - (*xhat)[k] * sum_dy_xhat);
            } else {
              dx[k] += g * is * dy[k];
            }
          }
      }
    });
  }
  return output;
}

TensorPtr fully_connected_forward(Tape& tape, const TensorPtr& input, const LayerParams& params) {
  require_kind(params, LayerKind::kFullyConnected, "fully_connected");
  const Tensor& w = *params.weights;
  const Tensor& x = *input;
  if (w.rank() != 2) throw NnError("fully_connected: weights must be (out, in)");
  const std::size_t out_features = w.dim(0);
  const std::size_t in_features = w.dim(1);
  const bool vector_input = x.rank() == 1;
  if (x.rank() > 2 || x.shape().back() != in_features) {
    throw NnError("fully_connected: input " + shape_to_string(x.shape()) +
                  " does not match weights " + shape_to_string(w.shape()));
  }
  const std::size_t batch = vector_input ? 1 : x.dim(0);
  auto output = vector_input ? make_tensor({out_features}) : make_tensor({batch, out_features});

  ConstMatrixMap xm(x.data().data(), static_cast<Eigen::Index>(batch),
                    static_cast<Eigen::Index>(in_features));
  ConstMatrixMap wm(w.data().data(), static_cast<Eigen::Index>(out_features),
                    static_cast<Eigen::Index>(in_features));
  MatrixMap ym(output->data().data(), static_cast<Eigen::Index>(batch),
               static_cast<Eigen::Index>(out_features));
  ym.noalias() = xm * wm.transpose();
  if (params.bias) {
    for (std::size_t n = 0; n < batch; ++n)
      for (std::size_t o = 0; o < out_features; ++o) ym(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(o)) += (*params.bias)[o];
  }

  const TensorPtr weights = params.weights;
  const TensorPtr bias = params.bias;
  if (tape.recording() && any_requires_grad({&input, &weights, &bias})) {
    output->set_requires_grad(true);
    tape.record([input, weights, bias, output, batch, in_features, out_features] {
      if (!output->has_grad()) return;
      ConstMatrixMap dy(output->grad().data(), static_cast<Eigen::Index>(batch),
                        static_cast<Eigen::Index>(out_features));
      if (input->requires_grad()) {
        ConstMatrixMap wm(weights->data().data(), static_cast<Eigen::Index>(out_features),
                          static_cast<Eigen::Index>(in_features));
        MatrixMap dx(input->ensure_grad().data(), static_cast<Eigen::Index>(batch),
                     static_cast<Eigen::Index>(in_features));
        dx.noalias() += dy * wm;
      }
      if (weights->requires_grad()) {
        ConstMatrixMap xm(input->data().data(), static_cast<Eigen::Index>(batch),
                          static_cast<Eigen::Index>(in_features));
        MatrixMap dw(weights->ensure_grad().data(), static_cast<Eigen::Index>(out_features),
                     static_cast<Eigen::Index>(in_features));
        dw.noalias() += dy.transpose() * xm;
      }
      if (bias && bias->requires_grad()) {
        auto db = bias->ensure_grad();
        for (std::size_t o = 0; o < out_features; ++o) db[o] += serial_sum(dy.data() + o, batch, out_features);
      }
    });
  }
  return output;
}

TensorPtr activation_forward(Tape& tape, const TensorPtr& input, Activation activation) {
  if (activation.kind == ActivationKind::kLeakyRelu &&
      !(activation.alpha > 0.0 && activation.alpha < 1.0)) {
    throw NnError("leaky_relu: alpha must lie in (0,1)");
  }
  auto output = make_tensor(input->shape());
  const auto x = input->data();
  auto y = output->data();
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = apply_activation(activation.kind, activation.alpha, x[i]);

  if (tape.recording() && input->requires_grad()) {
    output->set_requires_grad(true);
    tape.record([input, output, activation] {
      if (!output->has_grad()) return;
      const auto x = input->data();
      const auto y = output->data();
      const auto dy = output->grad();
      auto dx = input->ensure_grad();
      for (std::size_t i = 0; i < x.size(); ++i) {
        double d = 0.0;
        switch (activation.kind) {
          case ActivationKind::kRelu:
            d = x[i] > 0.0 ? 1.0 : 0.0;
            break;
          case ActivationKind::kLeakyRelu:
            d = x[i] > 0.0 ? 1.0 : activation.alpha;
            break;
          case ActivationKind::kTanh:
            d = 1.0 - y[i] * y[i];
            break;
          case ActivationKind::kSigmoid:
            d = y[i] * (1.0 - y[i]);
            break;
        }
        dx[i] += d * dy[i];
      }
    });
  }
  return output;
}

TensorPtr layer_forward(Tape& tape, const TensorPtr& input, const LayerParams& params,
                        bool training) {
  switch (params.kind) {
    case LayerKind::kConv2d:
      return conv2d_forward(tape, input, params);
    case LayerKind::kConv2dTranspose:
      return conv2d_transpose_forward(tape, input, params);
    case LayerKind::kBatchNorm:
      return batchnorm_forward(tape, input, params, training);
    case LayerKind::kFullyConnected:
      return fully_connected_forward(tape, input, params);
    case LayerKind::kActivation:
      return activation_forward(tape, input, params.hyper.activation);
  }
  throw NnError("unknown layer kind");
}

}  // namespace nodulegan::nn
