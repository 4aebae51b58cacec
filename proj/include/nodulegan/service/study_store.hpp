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
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "nodulegan/service/event_log.hpp"
#include "nodulegan/study/compose.hpp"
#include "nodulegan/study/report.hpp"

namespace nodulegan::service {

/// Request-level failure carrying the HTTP status it maps to.
class ServiceError : public std::runtime_error {
 public:
  ServiceError(int status, const std::string& message) : std::runtime_error(message), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

/// One rater's answer to one cell, as submitted.
struct CellCall {
  std::string cell_id;
  study::Realness realness = study::Realness::kReal;
  std::optional<dataset::NoduleClass> class_call;
};

struct SessionState {
  std::string session_id;
  std::string rater_id;
  std::string study_id;
  bool locked = false;
  bool forced = false;  // locked by the owner at scoring time
  std::set<int> completed;
  std::vector<study::RaterResponse> responses;
};

/// On-disk layout under the root:
///   studies/<study_id>/plan.json        full plan with hidden truth
///   studies/<study_id>/images/<id>.png  one file per image_id
///   studies/<study_id>/events.log       JSONL session events
///   studies/<study_id>/report.json      last score, rewritten per scoring
class StudyStore {
 public:
  /// Replays every study under the root. An empty owner token disables scoring.
  StudyStore(std::filesystem::path root, std::string owner_token);

  /// Writes a composed study's plan and images; the study id must be new.
  static void install_study(const std::filesystem::path& root, const study::ComposedStudy& composed);

  std::vector<std::string> study_ids() const;
  const study::StudyPlan& plan(const std::string& study_id) const;

  SessionState create_session(const std::string& study_id, const std::string& rater_id);
  SessionState session(const std::string& session_id) const;
  /// Rater-facing grid: cell ids and image URLs only.
  nlohmann::json grid_payload(const std::string& session_id, int experiment_index) const;
  SessionState submit(const std::string& session_id, int experiment_index, const std::vector<CellCall>& calls);
  SessionState lock(const std::string& session_id);

  /// Checks the owner token, optionally force-locks open sessions, scores a
  /// snapshot and persists report.json. Returns the serialized report.
  std::string score(const std::string& study_id, const std::string& owner_token, bool force);

  /// Path of a served image, or nullopt for an unknown id.
  std::optional<std::filesystem::path> image_path(const std::string& image_id) const;

  /// Test hook forwarded to the study's event log.
  void crash_on_next_append(const std::string& study_id);

  static nlohmann::json session_json(const SessionState& s);

 private:
  struct Study {
    study::StudyPlan plan;
    std::filesystem::path dir;
    std::unique_ptr<EventLog> log;
    std::vector<std::string> sessions;  // in open order
  };

  void apply(Study& study, const nlohmann::json& event);
  Study& study_or_throw(const std::string& study_id);
  SessionState& session_or_throw(const std::string& session_id);
  const SessionState& session_or_throw(const std::string& session_id) const;
  std::string fresh_session_id();

  std::filesystem::path root_;
  std::string owner_token_;
  mutable std::mutex mutex_;
  std::map<std::string, Study> studies_;
  std::map<std::string, SessionState> sessions_;
  std::map<std::string, std::pair<std::string, std::filesystem::path>> images_;  // id -> (study, file)
};

/// Parses a JSONL event log into scoring sessions without the store's
/// validation. Used to recompute scores offline from the raw log.
std::vector<study::SessionRecord> sessions_from_log(const std::filesystem::path& events_log);

}  // namespace nodulegan::service
