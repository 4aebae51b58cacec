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

#include <cstdint>
#include <vector>

#include "nodulegan/dataset/image_patch.hpp"

namespace nodulegan::testing {

/// Two-class 56x56 fixture on a dark noisy background: Gaussian bright blobs
/// labelled benign and bright rings labelled malignant, `per_class` of each,
/// interleaved. Fully determined by `seed`.
std::vector<dataset::ImagePatch> synthetic_nodules(std::size_t per_class, std::uint64_t seed);

double mean_pixel(const std::vector<dataset::ImagePatch>& patches);

}  // namespace nodulegan::testing
