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

#include "nodulegan/imgproc/resize.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace nodulegan::imgproc {

namespace {

struct Tap {
  std::size_t lo;
  std::size_t hi;
  double frac;
};

Tap source_tap(std::size_t dst, std::size_t src_extent, std::size_t dst_extent) {
  const double scale = static_cast<double>(src_extent) / static_cast<double>(dst_extent);
  double s = (static_cast<double>(dst) + 0.5) * scale - 0.5;
  s = std::clamp(s, 0.0, static_cast<double>(src_extent - 1));
  const auto lo = static_cast<std::size_t>(std::floor(s));
  const std::size_t hi = std::min(lo + 1, src_extent - 1);
  return {lo, hi, s - static_cast<double>(lo)};
}

}  // namespace

Image resize_bilinear(const Image& image, std::size_t width, std::size_t height) {
  if (image.width == 0 || image.height == 0 || width == 0 || height == 0) {
    throw ImageError("resize_bilinear: empty source or target");
  }
  Image out(width, height);
  for (std::size_t y = 0; y < height; ++y) {
    const Tap ty = source_tap(y, image.height, height);
    for (std::size_t x = 0; x < width; ++x) {
      const Tap tx = source_tap(x, image.width, width);
      const double top = image.at(tx.lo, ty.lo) * (1.0 - tx.frac) + image.at(tx.hi, ty.lo) * tx.frac;
      const double bottom = image.at(tx.lo, ty.hi) * (1.0 - tx.frac) + image.at(tx.hi, ty.hi) * tx.frac;
      out.at(x, y) = top * (1.0 - ty.frac) + bottom * ty.frac;
    }
  }
  return out;
}

Image center_crop_resize(const Image& patch, std::size_t target) {
  if (patch.width <= 1 || patch.height <= 1) {
    throw ImageError("center_crop_resize: degenerate source " + std::to_string(patch.width) + "x" +
                     std::to_string(patch.height));
  }
  if (patch.width < kMinSourceExtent || patch.height < kMinSourceExtent) {
    throw ImageError("center_crop_resize: source " + std::to_string(patch.width) + "x" +
                     std::to_string(patch.height) + " is smaller than 8x8");
  }
  const std::size_t side = std::min(patch.width, patch.height);
  const std::size_t x0 = (patch.width - side) / 2;
  const std::size_t y0 = (patch.height - side) / 2;
  Image square(side, side);
  for (std::size_t y = 0; y < side; ++y)
    for (std::size_t x = 0; x < side; ++x) square.at(x, y) = patch.at(x0 + x, y0 + y);
  if (side == target) return square;
  return resize_bilinear(square, target, target);
}

}  // namespace nodulegan::imgproc
