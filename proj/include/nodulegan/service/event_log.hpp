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

#include <filesystem>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace nodulegan::service {

class LogError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Append-only file of one JSON object per line.
///
/// Each append is a single write(2) of the serialized record plus newline on
/// an O_APPEND descriptor, followed by fsync, under a mutex. On open, a final
/// line without its newline or that does not parse (a torn write) is dropped
/// and the file truncated back to the last complete record. A bad line
/// anywhere else is reported as corruption.
class EventLog {
 public:
  explicit EventLog(std::filesystem::path path);
  ~EventLog();
  EventLog(const EventLog&) = delete;
  EventLog& operator=(const EventLog&) = delete;

  /// Records recovered at open time, in order.
  const std::vector<nlohmann::json>& replayed() const { return replayed_; }
  /// Bytes discarded from a torn tail at open time.
  std::size_t discarded_bytes() const { return discarded_; }

  void append(const nlohmann::json& record);

  /// Test hook: the next append writes only the first half of its record and
  /// then the process kills itself with SIGKILL.
  void crash_on_next_append() { crash_next_ = true; }

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  int fd_ = -1;
  std::mutex mutex_;
  std::vector<nlohmann::json> replayed_;
  std::size_t discarded_ = 0;
  bool crash_next_ = false;
};

}  // namespace nodulegan::service
