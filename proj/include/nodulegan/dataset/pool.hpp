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
#include <span>
#include <vector>

#include "nodulegan/dataset/consensus.hpp"
#include "nodulegan/imgproc/diffusion.hpp"

// On-disk patch collections.
//
// A patch set directory holds `index.csv` with the columns
//   source_id,file,provenance,class,seed
// (class and seed may be empty) and one 8-bit PNG per patch under `images/`.
// A prepared training pool is a patch set plus `consensus.csv`
//   nodule_id,ratings,consensus,class
// and `exclusions.csv`
//   nodule_id,diameter_mm,ratings,consensus,reasons
// where list-valued columns are semicolon-separated.
namespace nodulegan::dataset {

struct LoaderOptions {
  /// Applied on the 8-bit intensity scale after resizing, before
  /// normalization. Disabled when empty.
  std::optional<imgproc::DiffusionConfig> diffusion;
};

/// Reads a patch file, center-crops and resizes it to 56x56, optionally
/// diffuses it and maps it to [-1, 1].
imgproc::Image load_patch_image(const std::filesystem::path& path, const LoaderOptions& options);
PatchLoader file_patch_loader(LoaderOptions options = {});

void write_patch_set(const std::filesystem::path& dir, std::span<const ImagePatch> patches);
std::vector<ImagePatch> read_patch_set(const std::filesystem::path& dir);

void write_pool(const std::filesystem::path& dir, const FilterResult& result);
std::vector<LabeledNodule> read_pool(const std::filesystem::path& dir);

/// Filters by class (mixed keeps everything) and shuffles with `seed`.
/// An empty result throws, naming the per-class counts of the pool.
std::vector<LabeledNodule> class_subset(std::span<const LabeledNodule> pool, ClassMode mode,
                                        std::uint64_t seed);

}  // namespace nodulegan::dataset
