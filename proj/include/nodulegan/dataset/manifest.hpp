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

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace nodulegan::dataset {

struct NoduleAnnotation {
  std::string nodule_id;
  std::filesystem::path patch_path;  // resolved against the manifest directory
  double diameter_mm = 0.0;
  std::vector<int> ratings;  // one malignancy rating in [1, 5] per reader
};

struct ManifestRowError {
  std::size_t line = 0;  // 1-based line in the manifest file
  std::string field;     // column name, or "row" for structural problems
  std::string message;
};

struct ManifestParseResult {
  std::vector<NoduleAnnotation> annotations;
  std::vector<ManifestRowError> errors;

  bool ok() const { return errors.empty(); }
  /// One line per error plus a trailing count, e.g. for CLI output.
  std::string summary() const;
};

/// Parses the manifest CSV:
///
///   nodule_id,patch_path,diameter_mm,ratings
///   LIDC-0001,patches/0001.png,6.5,2;2;1;3
///
/// The header row is optional. Ratings are semicolon-separated integers.
/// Rows with a missing patch file, a rating outside [1, 5], a non-positive
/// diameter or a repeated nodule_id are reported per line and skipped; the
/// remaining rows are still returned.
ManifestParseResult parse_annotations(std::istream& in, const std::filesystem::path& base_dir,
                                      bool check_files = true);
ManifestParseResult parse_annotations(const std::filesystem::path& manifest, bool check_files = true);

/// Splits one CSV line, honouring double-quoted fields.
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace nodulegan::dataset
