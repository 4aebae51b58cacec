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

#include "nodulegan/imgproc/intensity.hpp"

#include <algorithm>
#include <cmath>

namespace nodulegan::imgproc {

Image to_real(const GrayImage8& image) {
  Image out(image.width, image.height);
  std::copy(image.pixels.begin(), image.pixels.end(), out.pixels.begin());
  return out;
}

GrayImage8 to_gray8(const Image& image) {
  GrayImage8 out(image.width, image.height);
  for (std::size_t i = 0; i < image.pixels.size(); ++i) {
    const double v = std::isnan(image.pixels[i]) ? 0.0 : std::floor(image.pixels[i] + 0.5);
    out.pixels[i] = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
  }
  return out;
}

double normalize_value(double level) { return level / 127.5 - 1.0; }

Image normalize_to_model_range(const GrayImage8& image) {
  Image out(image.width, image.height);
  for (std::size_t i = 0; i < image.pixels.size(); ++i) out.pixels[i] = normalize_value(image.pixels[i]);
  return out;
}

std::uint8_t denormalize_value(double value) {
  const double clamped = std::isnan(value) ? -1.0 : std::clamp(value, -1.0, 1.0);
  const double level = std::floor((clamped + 1.0) * 127.5 + 0.5);
  return static_cast<std::uint8_t>(std::clamp(level, 0.0, 255.0));
}

GrayImage8 denormalize(const Image& image) {
  GrayImage8 out(image.width, image.height);
  for (std::size_t i = 0; i < image.pixels.size(); ++i) out.pixels[i] = denormalize_value(image.pixels[i]);
  return out;
}

}  // namespace nodulegan::imgproc
