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

#include "nodulegan/dataset/manifest.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "nodulegan/dataset/image_patch.hpp"

namespace nodulegan::dataset {

namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool parse_double(const std::string& text, double& out) {
  const char* begin = text.data();
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end;
}

bool parse_int(const std::string& text, int& out) {
  const char* begin = text.data();
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        field += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(trim(field));
      field.clear();
    } else {
      field += ch;
    }
  }
  fields.push_back(trim(field));
  return fields;
}

std::string ManifestParseResult::summary() const {
  std::ostringstream os;
  for (const auto& e : errors) os << "line " << e.line << ": " << e.field << ": " << e.message << '\n';
  os << annotations.size() << " annotations, " << errors.size() << " row errors";
  return os.str();
}

ManifestParseResult parse_annotations(std::istream& in, const std::filesystem::path& base_dir,
                                      bool check_files) {
  ManifestParseResult result;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    if (line_no == 1 && !fields.empty() && fields[0] == "nodule_id") continue;

    const auto fail = [&](std::string field, std::string message) {
      result.errors.push_back({line_no, std::move(field), std::move(message)});
    };
    if (fields.size() != 4) {
      fail("row", "expected 4 columns, found " + std::to_string(fields.size()));
      continue;
    }
    NoduleAnnotation a;
    a.nodule_id = fields[0];
    if (a.nodule_id.empty()) {
      fail("nodule_id", "empty");
      continue;
    }
    if (seen.count(a.nodule_id)) {
      fail("nodule_id", "duplicate nodule_id '" + a.nodule_id + "'");
      continue;
    }
    seen.insert(a.nodule_id);
    if (fields[1].empty()) {
      fail("patch_path", "empty");
      continue;
    }
    a.patch_path = std::filesystem::path(fields[1]);
    if (a.patch_path.is_relative()) a.patch_path = base_dir / a.patch_path;
    if (check_files && !std::filesystem::is_regular_file(a.patch_path)) {
      fail("patch_path", "missing patch file " + a.patch_path.string());
      continue;
    }
    if (!parse_double(fields[2], a.diameter_mm) || !(a.diameter_mm > 0.0)) {
      fail("diameter_mm", "must be a positive number, got '" + fields[2] + "'");
      continue;
    }
    bool ratings_ok = true;
    std::stringstream ratings(fields[3]);
    std::string token;
    while (std::getline(ratings, token, ';')) {
      token = trim(token);
      int r = 0;
      if (!parse_int(token, r)) {
        fail("ratings", "not an integer: '" + token + "'");
        ratings_ok = false;
        break;
      }
      if (r < 1 || r > 5) {
        fail("ratings", "rating " + std::to_string(r) + " outside [1, 5]");
        ratings_ok = false;
        break;
      }
      a.ratings.push_back(r);
    }
    if (!ratings_ok) continue;
    if (a.ratings.empty()) {
      fail("ratings", "no ratings");
      continue;
    }
    result.annotations.push_back(std::move(a));
  }
  return result;
}

ManifestParseResult parse_annotations(const std::filesystem::path& manifest, bool check_files) {
  std::ifstream in(manifest);
  if (!in) throw DatasetError("cannot open manifest " + manifest.string());
  return parse_annotations(in, manifest.parent_path(), check_files);
}

}  // namespace nodulegan::dataset
