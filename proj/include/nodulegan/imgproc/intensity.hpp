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

#include "nodulegan/imgproc/image.hpp"

namespace nodulegan::imgproc {

/// Linear map from the 8-bit range onto the generator's tanh range:
/// p -> p / 127.5 - 1.
double normalize_value(double level);
Image normalize_to_model_range(const GrayImage8& image);

/// Inverse of normalize; values are clamped to [-1, 1] and rounded half-up.
std::uint8_t denormalize_value(double value);
GrayImage8 denormalize(const Image& image);

}  // namespace nodulegan::imgproc
