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

#include "nodulegan/nn/gradcheck.hpp"

#include <cmath>
#include <random>

#include "nodulegan/nn/layers.hpp"
#include "nodulegan/nn/ops.hpp"

namespace nodulegan::nn {

std::vector<GradcheckResult> gradcheck(const std::function<TensorPtr(Tape&)>& loss,
                                       std::span<const NamedParameter> wrt, double step,
                                       double tolerance) {
  for (const auto& p : wrt) p.tensor->clear_grad();
  Tape tape;
  TensorPtr out = loss(tape);
  tape.backward(*out);

  std::vector<GradcheckResult> results;
  for (const auto& p : wrt) {
    Tensor& t = *p.tensor;
    std::vector<double> analytic(t.numel(), 0.0);
    if (t.has_grad()) std::copy(t.grad().begin(), t.grad().end(), analytic.begin());

    Tape quiet;
    quiet.set_recording(false);
    double diff_sq = 0.0;
    double analytic_sq = 0.0;
    double numeric_sq = 0.0;
    for (std::size_t i = 0; i < t.numel(); ++i) {
      const double saved = t[i];
      t[i] = saved + step;
      const double plus = (*loss(quiet))[0];
      t[i] = saved - step;
      const double minus = (*loss(quiet))[0];
      t[i] = saved;
      const double numeric = (plus - minus) / (2.0 * step);
      diff_sq += (analytic[i] - numeric) * (analytic[i] - numeric);
      analytic_sq += analytic[i] * analytic[i];
      numeric_sq += numeric * numeric;
    }
    const double scale = std::sqrt(std::max(analytic_sq, numeric_sq));
    const double rel = scale > 0.0 ? std::sqrt(diff_sq) / scale : 0.0;
    results.push_back({p.name, rel, tolerance});
  }
  return results;
}

namespace {

TensorPtr random_tensor(Shape shape, std::mt19937_64& rng, bool requires_grad = true,
                        double stddev = 1.0) {
  auto t = make_tensor(std::move(shape));
  std::normal_distribution<double> dist(0.0, stddev);
  for (double& v : t->data()) v = dist(rng);
  t->set_requires_grad(requires_grad);
  return t;
}

void randomize(LayerParams& layer, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 0.5);
  for (double& v : layer.weights->data()) v = dist(rng);
  for (double& v : layer.bias->data()) v = dist(rng);
}

void append(std::vector<GradcheckResult>& all, const std::string& prefix,
            std::vector<GradcheckResult> part) {
  for (auto& r : part) {
    r.name = prefix + "/" + r.name;
    all.push_back(std::move(r));
  }
}

// Projects the layer output onto a fixed random direction so every output
// element contributes to the checked scalar.
std::function<TensorPtr(Tape&)> projected(std::function<TensorPtr(Tape&)> forward,
                                          std::mt19937_64& rng) {
  Tape probe;
  probe.set_recording(false);
  const Shape shape = forward(probe)->shape();
  auto direction = random_tensor(shape, rng, false);
  return [forward, direction](Tape& tape) { return weighted_sum(tape, forward(tape), *direction); };
}

}  // namespace

std::vector<GradcheckResult> run_layer_gradchecks(std::uint64_t seed, double tolerance) {
  constexpr double kStep = 1e-6;
  std::mt19937_64 rng(seed);
  std::vector<GradcheckResult> all;

  struct ConvCase {
    const char* name;
    std::size_t kernel, stride, padding;
  };
  for (const ConvCase& c : {ConvCase{"conv2d_k3_s1_p0", 3, 1, 0}, ConvCase{"conv2d_k3_s2_p1", 3, 2, 1},
                            ConvCase{"conv2d_k4_s2_p1", 4, 2, 1}}) {
    auto layer = make_conv2d(2, 3, c.kernel, c.stride, c.padding);
    randomize(layer, rng);
    auto x = random_tensor({2, 2, 5, 5}, rng);
    auto loss = projected([&layer, x](Tape& t) { return conv2d_forward(t, x, layer); }, rng);
    const NamedParameter wrt[] = {{"input", x}, {"weights", layer.weights}, {"bias", layer.bias}};
    append(all, c.name, gradcheck(loss, wrt, kStep, tolerance));
  }

  for (const ConvCase& c : {ConvCase{"conv2d_transpose_k3_s2_p1", 3, 2, 1},
                            ConvCase{"conv2d_transpose_k2_s1_p0", 2, 1, 0}}) {
    auto layer = make_conv2d_transpose(3, 2, c.kernel, c.stride, c.padding);
    randomize(layer, rng);
    auto x = random_tensor({2, 3, 3, 3}, rng);
    auto loss =
        projected([&layer, x](Tape& t) { return conv2d_transpose_forward(t, x, layer); }, rng);
    const NamedParameter wrt[] = {{"input", x}, {"weights", layer.weights}, {"bias", layer.bias}};
    append(all, c.name, gradcheck(loss, wrt, kStep, tolerance));
  }

  for (bool training : {true, false}) {
    auto layer = make_batchnorm(3);
    randomize(layer, rng);
    std::uniform_real_distribution<double> pos(0.5, 1.5);
    for (double& v : layer.running_var->data()) v = pos(rng);
    for (double& v : layer.running_mean->data()) v = pos(rng) - 1.0;
    auto x = random_tensor({3, 3, 4, 4}, rng);
    auto loss = projected(
        [&layer, x, training](Tape& t) { return batchnorm_forward(t, x, layer, training); }, rng);
    const NamedParameter wrt[] = {{"input", x}, {"gamma", layer.weights}, {"beta", layer.bias}};
    append(all, training ? "batchnorm_train" : "batchnorm_infer",
           gradcheck(loss, wrt, kStep, tolerance));
  }

  {
    auto layer = make_fully_connected(8, 4);
    randomize(layer, rng);
    auto x = random_tensor({3, 8}, rng);
    auto loss = projected([&layer, x](Tape& t) { return fully_connected_forward(t, x, layer); }, rng);
    const NamedParameter wrt[] = {{"input", x}, {"weights", layer.weights}, {"bias", layer.bias}};
    append(all, "fully_connected", gradcheck(loss, wrt, kStep, tolerance));
  }

  struct ActCase {
    const char* name;
    Activation act;
  };
  for (const ActCase& a : {ActCase{"relu", {ActivationKind::kRelu, 0.0}},
                           ActCase{"leaky_relu", {ActivationKind::kLeakyRelu, 0.2}},
                           ActCase{"tanh", {ActivationKind::kTanh, 0.0}},
                           ActCase{"sigmoid", {ActivationKind::kSigmoid, 0.0}}}) {
    auto x = random_tensor({2, 2, 5, 5}, rng);
    auto loss = projected([x, act = a.act](Tape& t) { return activation_forward(t, x, act); }, rng);
    const NamedParameter wrt[] = {{"input", x}};
    append(all, a.name, gradcheck(loss, wrt, kStep, tolerance));
  }

  {
    std::uniform_real_distribution<double> prob(0.05, 0.95);
    auto p = make_tensor({16});
    for (double& v : p->data()) v = prob(rng);
    p->set_requires_grad(true);
    const NamedParameter wrt[] = {{"probabilities", p}};
    append(all, "neg_mean_log",
           gradcheck([p](Tape& t) { return neg_mean_log(t, p, 1e-7); }, wrt, kStep, tolerance));
    append(all, "neg_mean_log1m",
           gradcheck([p](Tape& t) { return neg_mean_log1m(t, p, 1e-7); }, wrt, kStep, tolerance));
  }
  return all;
}

}  // namespace nodulegan::nn
