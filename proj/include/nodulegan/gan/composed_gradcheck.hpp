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

#include "nodulegan/nn/gradcheck.hpp"

namespace nodulegan::gan {

/// Finite-difference check of the full discriminator loss through
/// D(G(z)) and D(x) at toy sizes (2x2 latent map up to 5x5 images), against
/// every generator and discriminator parameter and the latent batch.
std::vector<nn::GradcheckResult> run_composed_gradcheck(std::uint64_t seed, double tolerance = 1e-4);

}  // namespace nodulegan::gan
