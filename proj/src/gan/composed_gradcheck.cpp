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

#include "nodulegan/gan/composed_gradcheck.hpp"

#include <cmath>
#include <random>

#include "nodulegan/gan/losses.hpp"
#include "nodulegan/gan/networks.hpp"

namespace nodulegan::gan {

std::vector<nn::GradcheckResult> run_composed_gradcheck(std::uint64_t seed, double tolerance) {
  GeneratorConfig gc;
  gc.z_dim = 3;
  gc.base_size = 2;
  gc.channels = {3, 2, 2};
  gc.kernel = 2;
  gc.stride = 1;
  gc.padding = 0;
  gc.output_size = 5;  // 2 -> 3 -> 4 -> 5
  DiscriminatorConfig dc;
  dc.input_size = 5;
  dc.channels = {2, 3};
  dc.kernel = 3;
  dc.stride = 2;
  dc.padding = 1;
  dc.head_input = 12;  // 5 -> 3 -> 2, 2*2*3

  std::mt19937_64 rng(seed);
  Generator g(gc);
  Discriminator d(dc);
  // Large weights so no gradient is negligible next to the step size.
  g.init(rng, 0.5);
  d.init(rng, 0.5);
  // init zeroes biases; with ReLU dead patches that leaves pre-activations
  // exactly on the leaky kink, where central differences are meaningless.
  std::normal_distribution<double> offset(0.0, 0.5);
  for (const auto& params : {g.parameters(), d.parameters()}) {
    for (const auto& p : params) {
      if (p.name.ends_with(".bias") || p.name.ends_with(".beta")) {
        for (double& v : p.tensor->data()) v = offset(rng);
      }
    }
  }

  constexpr std::size_t kBatch = 3;
  std::normal_distribution<double> normal(0.0, 1.0);
  auto z = nn::make_parameter({kBatch, gc.z_dim});
  for (double& v : z->data()) v = normal(rng);
  auto real = nn::make_tensor({kBatch, 1, 5, 5});
  for (double& v : real->data()) v = std::tanh(normal(rng));

  auto loss = [&](nn::Tape& tape) {
    auto fake = g.forward(tape, z, true);
    return discriminator_loss(tape, d.forward(tape, real), d.forward(tape, fake));
  };
  auto wrt = g.parameters();
  for (auto& p : d.parameters()) wrt.push_back(p);
  wrt.push_back({"z", z});
  auto results = nn::gradcheck(loss, wrt, 1e-6, tolerance);
  for (auto& r : results) r.name = "composed/" + r.name;
  return results;
}

}  // namespace nodulegan::gan
