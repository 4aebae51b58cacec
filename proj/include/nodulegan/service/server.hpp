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
#include <memory>
#include <optional>
#include <string>

#include "nodulegan/service/study_store.hpp"

namespace nodulegan::service {

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::optional<std::filesystem::path> static_dir;  // built rater UI, served at /
};

/// JSON-over-HTTP front end of a StudyStore.
///
///   POST /studies/{id}/sessions             {"rater_id"}
///   GET  /sessions/{id}
///   GET  /sessions/{id}/grids/{n}
///   POST /sessions/{id}/grids/{n}/responses {"responses": [{"cell_id", "realness", "class_call"}]}
///   POST /sessions/{id}/lock
///   POST /studies/{id}/score                {"force"}, header X-Owner-Token
///   GET  /images/{id}
///
/// Errors are {"error": message} with a 4xx status.
class Server {
 public:
  Server(StudyStore& store, ServerOptions options);
  ~Server();

  /// Binds the socket and returns the bound port.
  int bind();
  /// Serves until stop(); bind() must have succeeded.
  void run();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace nodulegan::service
