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
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace nodulegan::imgproc {

class ImageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Row-major single-channel image of real intensities.
struct Image {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> pixels;

  Image() = default;
  Image(std::size_t w, std::size_t h, double fill = 0.0) : width(w), height(h), pixels(w * h, fill) {}

  double& at(std::size_t x, std::size_t y) { return pixels[y * width + x]; }
  double at(std::size_t x, std::size_t y) const { return pixels[y * width + x]; }
  bool empty() const { return pixels.empty(); }
};

/// Row-major 8-bit grayscale image.
struct GrayImage8 {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;

  GrayImage8() = default;
  GrayImage8(std::size_t w, std::size_t h, std::uint8_t fill = 0)
      : width(w), height(h), pixels(w * h, fill) {}

  std::uint8_t& at(std::size_t x, std::size_t y) { return pixels[y * width + x]; }
  std::uint8_t at(std::size_t x, std::size_t y) const { return pixels[y * width + x]; }
};

/// Widens 8-bit levels to reals without rescaling.
Image to_real(const GrayImage8& image);
/// Rounds half-up and clamps to [0, 255] without rescaling.
GrayImage8 to_gray8(const Image& image);

}  // namespace nodulegan::imgproc
