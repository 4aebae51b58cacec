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

#include "nodulegan/nn/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

namespace nodulegan::nn {

namespace {

constexpr std::array<char, 4> kMagic = {'N', 'F', 'C', 'K'};
// Sanity bounds so a corrupt header cannot trigger huge allocations.
constexpr std::uint32_t kMaxNameLength = 4096;
constexpr std::uint32_t kMaxRank = 8;

template <typename U>
void put_le(std::ostream& out, U value) {
  std::array<char, sizeof(U)> bytes{};
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
  }
  out.write(bytes.data(), bytes.size());
}

template <typename U>
bool get_le(std::istream& in, U& value) {
  std::array<unsigned char, sizeof(U)> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (in.gcount() != static_cast<std::streamsize>(bytes.size())) return false;
  value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(bytes[i]) << (8 * i);
  return true;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw NnError("checkpoint: truncated or corrupt stream (" + what + ")");
}

}  // namespace

void write_checkpoint(std::ostream& out, std::span<const NamedParameter> params) {
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(out, kCheckpointVersion);
  for (const auto& p : params) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(p.name.size()));
    out.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    const Shape& shape = p.tensor->shape();
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(shape.size()));
    for (std::size_t extent : shape) put_le<std::uint64_t>(out, extent);
    for (double v : p.tensor->data()) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  }
  if (!out) throw NnError("checkpoint: write failed");
}

void write_checkpoint(const std::filesystem::path& path, std::span<const NamedParameter> params) {
  // Write-then-rename so a reader never observes a half-written file.
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw NnError("checkpoint: cannot open " + tmp.string());
    write_checkpoint(out, params);
  }
  std::filesystem::rename(tmp, path);
}

std::vector<CheckpointRecord> read_checkpoint(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (in.gcount() != 4 || magic != kMagic) throw NnError("checkpoint: bad magic bytes");
  std::uint32_t version = 0;
  require(get_le(in, version), "version");
  if (version != kCheckpointVersion) {
    throw NnError("checkpoint: unsupported version " + std::to_string(version));
  }

  std::vector<CheckpointRecord> records;
  while (in.peek() != std::char_traits<char>::eof()) {
    std::uint32_t name_length = 0;
    require(get_le(in, name_length), "name length");
    require(name_length <= kMaxNameLength, "name length bound");
    std::string name(name_length, '\0');
    in.read(name.data(), name_length);
    require(in.gcount() == static_cast<std::streamsize>(name_length), "name");
    std::uint32_t rank = 0;
    require(get_le(in, rank), "rank");
    require(rank >= 1 && rank <= kMaxRank, "rank bound");
    Shape shape(rank);
    for (auto& extent : shape) {
      std::uint64_t e = 0;
      require(get_le(in, e), "extent");
      require(e > 0, "extent positive");
      extent = static_cast<std::size_t>(e);
    }
    std::vector<double> values(shape_numel(shape));
    for (double& v : values) {
      std::uint64_t bits = 0;
      require(get_le(in, bits), "values of '" + name + "'");
      v = std::bit_cast<double>(bits);
    }
    records.push_back({std::move(name), Tensor(std::move(shape), std::move(values))});
  }
  return records;
}

std::vector<CheckpointRecord> read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NnError("checkpoint: cannot open " + path.string());
  return read_checkpoint(in);
}

void load_into(std::span<const CheckpointRecord> records, std::span<const NamedParameter> params) {
  std::map<std::string, const CheckpointRecord*> by_name;
  for (const auto& r : records) {
    if (!by_name.emplace(r.name, &r).second) throw NnError("checkpoint: duplicate record '" + r.name + "'");
  }
  if (by_name.size() != params.size()) {
    throw NnError("checkpoint: holds " + std::to_string(by_name.size()) + " records, model has " +
                  std::to_string(params.size()) + " parameters");
  }
  for (const auto& p : params) {
    auto it = by_name.find(p.name);
    if (it == by_name.end()) throw NnError("checkpoint: missing parameter '" + p.name + "'");
    const Tensor& src = it->second->tensor;
    if (src.shape() != p.tensor->shape()) {
      throw NnError("checkpoint: parameter '" + p.name + "' has shape " +
                    shape_to_string(src.shape()) + ", model expects " +
                    shape_to_string(p.tensor->shape()));
    }
    std::copy(src.data().begin(), src.data().end(), p.tensor->data().begin());
  }
}

}  // namespace nodulegan::nn
