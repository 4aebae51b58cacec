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
#include <filesystem>
#include <optional>
#include <vector>

#include "nodulegan/dataset/image_patch.hpp"
#include "nodulegan/gan/networks.hpp"

namespace nodulegan::gan {

struct LoadedGenerator {
  Generator generator;
  dataset::ClassMode class_mode;
  std::filesystem::path checkpoint;
  std::uint64_t iteration = 0;
};

/// Reads model.json and a checkpoint from a model directory. Without an
/// explicit checkpoint the highest iteration is used.
LoadedGenerator load_generator(const std::filesystem::path& model_dir,
                               const std::optional<std::filesystem::path>& checkpoint = std::nullopt);

/// n patches from batchnorm running statistics. Patch i draws its latent
/// vector from a generator seeded with seed + i, which is the seed recorded
/// on the patch, so any single patch can be regenerated on its own.
std::vector<dataset::ImagePatch> sample(const Generator& generator, std::size_t n, std::uint64_t seed,
                                        std::optional<dataset::NoduleClass> label);

/// Latent batch (count, z_dim) with rows drawn from N(0, 1) seeded by seed + row.
nn::TensorPtr latent_batch(std::size_t z_dim, std::size_t count, std::uint64_t seed);

}  // namespace nodulegan::gan
