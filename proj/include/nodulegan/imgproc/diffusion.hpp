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

#include <cstddef>

#include "nodulegan/imgproc/image.hpp"

namespace nodulegan::imgproc {

enum class Conductance {
  kExponential,  // g(s) = exp(-(s/kappa)^2)
  kRational,     // g(s) = 1 / (1 + (s/kappa)^2)
};

/// Perona-Malik settings. Boundaries are always Neumann (zero flux).
struct DiffusionConfig {
  std::size_t iterations = 5;
  double kappa = 30.0;   // edge threshold, in the image's intensity units
  double lambda = 0.25;  // explicit step, stable for <= 0.25 on the 4-neighbour stencil
  Conductance conductance = Conductance::kExponential;

  /// Throws ImageError unless 0 < lambda <= 0.25 and kappa > 0.
  void validate() const;
};

double conductance(double gradient_magnitude, double kappa, Conductance kind);

/// Explicit 4-neighbour anisotropic diffusion:
///   I <- I + lambda * sum_{d in N,S,E,W} g(|D_d I|) * D_d I
/// where D_d I is the difference to the neighbour in direction d and a
/// missing neighbour (image border) contributes zero flux.
Image perona_malik(const Image& image, const DiffusionConfig& config);

}  // namespace nodulegan::imgproc
