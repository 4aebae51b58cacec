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

inline constexpr std::size_t kPatchSize = 56;
inline constexpr std::size_t kMinSourceExtent = 8;

/// Bilinear resampling with pixel-centre alignment: output pixel x samples
/// source coordinate (x + 0.5) * (src / dst) - 0.5, clamped to the edge.
Image resize_bilinear(const Image& image, std::size_t width, std::size_t height);

/// Crops the largest centred square, then resizes it to target x target.
/// Sources smaller than 8x8 are rejected.
Image center_crop_resize(const Image& patch, std::size_t target = kPatchSize);

}  // namespace nodulegan::imgproc
