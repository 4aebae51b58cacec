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

#include "nodulegan/dataset/image_patch.hpp"

#include <cmath>

namespace nodulegan::dataset {

std::string_view to_string(Provenance p) { return p == Provenance::kReal ? "real" : "generated"; }

std::string_view to_string(NoduleClass c) { return c == NoduleClass::kBenign ? "benign" : "malignant"; }

std::string_view to_string(ClassMode m) {
  switch (m) {
    case ClassMode::kBenign:
      return "benign";
    case ClassMode::kMalignant:
      return "malignant";
    case ClassMode::kMixed:
      return "mixed";
  }
  return "mixed";
}

Provenance parse_provenance(std::string_view text) {
  if (text == "real") return Provenance::kReal;
  if (text == "generated") return Provenance::kGenerated;
  throw DatasetError("unknown provenance '" + std::string(text) + "'");
}

NoduleClass parse_nodule_class(std::string_view text) {
  if (text == "benign") return NoduleClass::kBenign;
  if (text == "malignant") return NoduleClass::kMalignant;
  throw DatasetError("unknown nodule class '" + std::string(text) + "'");
}

ClassMode parse_class_mode(std::string_view text) {
  if (text == "benign") return ClassMode::kBenign;
  if (text == "malignant") return ClassMode::kMalignant;
  if (text == "mixed") return ClassMode::kMixed;
  throw DatasetError("unknown class mode '" + std::string(text) + "' (expected benign|malignant|mixed)");
}

std::optional<NoduleClass> class_of(ClassMode mode) {
  switch (mode) {
    case ClassMode::kBenign:
      return NoduleClass::kBenign;
    case ClassMode::kMalignant:
      return NoduleClass::kMalignant;
    case ClassMode::kMixed:
      return std::nullopt;
  }
  return std::nullopt;
}

ImagePatch::ImagePatch(std::vector<double> pixels, Provenance provenance,
                       std::optional<NoduleClass> label, std::string source_id,
                       std::optional<std::uint64_t> seed)
    : pixels_(std::move(pixels)),
      provenance_(provenance),
      label_(label),
      source_id_(std::move(source_id)),
      seed_(seed) {
  if (pixels_.size() != kSide * kSide) {
    throw DatasetError("patch '" + source_id_ + "' must be 56x56, got " +
                       std::to_string(pixels_.size()) + " pixels");
  }
  for (double v : pixels_) {
    // NaN passes this check; the trainer's loss guard catches it.
    if (v < -1.0 || v > 1.0) {
      throw DatasetError("patch '" + source_id_ + "' has a pixel outside [-1, 1]: " + std::to_string(v));
    }
  }
}

imgproc::Image ImagePatch::image() const {
  imgproc::Image img(kSide, kSide);
  img.pixels = pixels_;
  return img;
}

}  // namespace nodulegan::dataset
