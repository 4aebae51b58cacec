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
#include <string>
#include <vector>

#include "nodulegan/imgproc/image.hpp"

namespace nodulegan::imgproc {

/// Reads PNG (any bit depth or colour type, reduced to 8-bit gray) or binary
/// PGM (P5, maxval <= 255). Format is detected from the file signature.
GrayImage8 read_image(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_png(const GrayImage8& image);
GrayImage8 decode_png(const std::vector<std::uint8_t>& bytes);

void write_png(const std::filesystem::path& path, const GrayImage8& image);
void write_pgm(const std::filesystem::path& path, const GrayImage8& image);
/// Picks PNG or PGM from the extension (.pgm -> PGM, anything else -> PNG).
void write_image(const std::filesystem::path& path, const GrayImage8& image);

}  // namespace nodulegan::imgproc
