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

#include "nodulegan/service/event_log.hpp"

#include <fcntl.h>
#include <signal.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

namespace nodulegan::service {

namespace {

void write_all(int fd, const char* data, std::size_t size, const std::filesystem::path& path) {
  while (size > 0) {
    const ssize_t n = ::write(fd, data, size);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw LogError("write to " + path.string() + " failed: " + std::strerror(errno));
    }
    data += n;
    size -= static_cast<std::size_t>(n);
  }
}

}  // namespace

EventLog::EventLog(std::filesystem::path path) : path_(std::move(path)) {
  std::string contents;
  {
    std::ifstream in(path_, std::ios::binary);
    if (in) {
      std::ostringstream ss;
      ss << in.rdbuf();
      contents = ss.str();
    }
  }

  std::size_t good_end = 0;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < contents.size()) {
    ++line_no;
    const std::size_t nl = contents.find('\n', pos);
    const bool complete = nl != std::string::npos;
    const std::string line = contents.substr(pos, complete ? nl - pos : std::string::npos);
    const std::size_t next = complete ? nl + 1 : contents.size();
    nlohmann::json record;
    bool parsed = false;
    try {
      record = nlohmann::json::parse(line);
      parsed = record.is_object();
    } catch (const nlohmann::json::exception&) {
    }
    if (!complete || !parsed) {
      if (next != contents.size()) {
        throw LogError(path_.string() + ":" + std::to_string(line_no) + ": corrupt record before end of log");
      }
      break;
    }
    replayed_.push_back(std::move(record));
    good_end = next;
    pos = next;
  }
  discarded_ = contents.size() - good_end;

  fd_ = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd_ < 0) throw LogError("cannot open " + path_.string() + ": " + std::strerror(errno));
  if (discarded_ > 0) {
    if (::ftruncate(fd_, static_cast<off_t>(good_end)) != 0 || ::fsync(fd_) != 0) {
      const std::string why = std::strerror(errno);
      ::close(fd_);
      throw LogError("cannot truncate torn tail of " + path_.string() + ": " + why);
    }
  }
}

EventLog::~EventLog() {
  if (fd_ >= 0) ::close(fd_);
}

void EventLog::append(const nlohmann::json& record) {
  const std::string line = record.dump() + "\n";
  std::lock_guard<std::mutex> lock(mutex_);
  if (crash_next_) {
    write_all(fd_, line.data(), line.size() / 2, path_);
    ::fsync(fd_);
    ::kill(::getpid(), SIGKILL);
  }
  write_all(fd_, line.data(), line.size(), path_);
  if (::fsync(fd_) != 0) throw LogError("fsync of " + path_.string() + " failed: " + std::strerror(errno));
}

}  // namespace nodulegan::service
