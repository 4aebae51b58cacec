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
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "nodulegan/imgproc/image.hpp"

namespace nodulegan::dataset {

class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Provenance { kReal, kGenerated };
enum class NoduleClass { kBenign, kMalignant };
/// Which nodules a model is trained on; also the class condition of a study grid.
enum class ClassMode { kBenign, kMalignant, kMixed };

std::string_view to_string(Provenance p);
std::string_view to_string(NoduleClass c);
std::string_view to_string(ClassMode m);
Provenance parse_provenance(std::string_view text);
NoduleClass parse_nodule_class(std::string_view text);
ClassMode parse_class_mode(std::string_view text);

/// The class a mode restricts to, or nullopt for mixed.
std::optional<NoduleClass> class_of(ClassMode mode);

/// One 56x56 nodule sample with values in [-1, 1]. Provenance and labels are
/// fixed at construction.
class ImagePatch {
 public:
  static constexpr std::size_t kSide = 56;

  ImagePatch(std::vector<double> pixels, Provenance provenance,
             std::optional<NoduleClass> label, std::string source_id,
             std::optional<std::uint64_t> seed = std::nullopt);

  const std::vector<double>& pixels() const { return pixels_; }
  Provenance provenance() const { return provenance_; }
  const std::optional<NoduleClass>& label() const { return label_; }
  const std::string& source_id() const { return source_id_; }
  const std::optional<std::uint64_t>& seed() const { return seed_; }

  imgproc::Image image() const;

 private:
  std::vector<double> pixels_;
  Provenance provenance_;
  std::optional<NoduleClass> label_;
  std::string source_id_;
  std::optional<std::uint64_t> seed_;
};

}  // namespace nodulegan::dataset
