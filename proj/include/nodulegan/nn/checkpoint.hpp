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
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "nodulegan/nn/adam.hpp"
#include "nodulegan/nn/tensor.hpp"

// Flat parameter container.
//
//   magic    4 bytes  "NFCK"
//   version  u32 LE   (currently 1)
//   records until end of stream, each:
//     name_length u32 LE, name bytes (UTF-8, no terminator)
//     rank        u32 LE, extents u64 LE x rank
//     values      f64 LE x prod(extents)
namespace nodulegan::nn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointRecord {
  std::string name;
  Tensor tensor;
};

void write_checkpoint(std::ostream& out, std::span<const NamedParameter> params);
void write_checkpoint(const std::filesystem::path& path, std::span<const NamedParameter> params);

std::vector<CheckpointRecord> read_checkpoint(std::istream& in);
std::vector<CheckpointRecord> read_checkpoint(const std::filesystem::path& path);

/// Copies values into `params` by name. Every parameter must be present with
/// a matching shape; extra records are an error too.
void load_into(std::span<const CheckpointRecord> records, std::span<const NamedParameter> params);

}  // namespace nodulegan::nn
