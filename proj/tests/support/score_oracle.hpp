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

#include <string>
#include <vector>

#include "json.hpp"

namespace nodulegan::testing {

/// One submitted call as it appears in a raw response log.
struct RawCall {
  std::string session_id;
  int experiment = 0;
  std::string cell_id;
  std::string realness;    // "real" / "generated"
  std::string class_call;  // "" when not given
};

struct RawSession {
  std::string session_id;
  std::string rater_id;
};

/// Second implementation of the score report, working directly from the
/// owner-side plan JSON and raw calls with plain integer fractions. Sessions
/// are reported in the given order.
nlohmann::json brute_force_report(const nlohmann::json& plan, const std::vector<RawSession>& sessions,
                                  const std::vector<RawCall>& calls);

}  // namespace nodulegan::testing
