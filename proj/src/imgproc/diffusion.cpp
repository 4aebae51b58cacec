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

#include "nodulegan/imgproc/diffusion.hpp"

#include <cmath>
#include <string>

namespace nodulegan::imgproc {

void DiffusionConfig::validate() const {
  if (!(lambda > 0.0 && lambda <= 0.25)) {
    throw ImageError("diffusion lambda must lie in (0, 0.25], got " + std::to_string(lambda));
  }
  if (!(kappa > 0.0) || !std::isfinite(kappa)) {
    throw ImageError("diffusion kappa must be positive, got " + std::to_string(kappa));
  }
}

double conductance(double gradient_magnitude, double kappa, Conductance kind) {
  const double r = gradient_magnitude / kappa;
  switch (kind) {
    case Conductance::kExponential:
      return std::exp(-r * r);
    case Conductance::kRational:
      return 1.0 / (1.0 + r * r);
  }
  return 1.0;
}

Image perona_malik(const Image& image, const DiffusionConfig& config) {
  config.validate();
  for (double v : image.pixels) {
    if (!std::isfinite(v)) throw ImageError("perona_malik: image contains non-finite pixels");
  }
  const std::size_t w = image.width;
  const std::size_t h = image.height;
  Image current = image;
  Image next = image;
  const auto flux = [&](double delta) {
    return conductance(std::abs(delta), config.kappa, config.conductance) * delta;
  };

  for (std::size_t it = 0; it < config.iterations; ++it) {
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        const double c = current.at(x, y);
        double update = 0.0;
        if (y > 0) update += flux(current.at(x, y - 1) - c);
        if (y + 1 < h) update += flux(current.at(x, y + 1) - c);
        if (x + 1 < w) update += flux(current.at(x + 1, y) - c);
        if (x > 0) update += flux(current.at(x - 1, y) - c);
        next.at(x, y) = c + config.lambda * update;
      }
    }
    std::swap(current, next);
  }
  return current;
}

}  // namespace nodulegan::imgproc
