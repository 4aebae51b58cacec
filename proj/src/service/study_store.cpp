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

#include "nodulegan/service/study_store.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <random>
#include <sstream>

#include "nodulegan/imgproc/image_io.hpp"
#include "nodulegan/imgproc/intensity.hpp"

namespace nodulegan::service {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kBadRequest = 400;
constexpr int kForbidden = 403;
constexpr int kNotFound = 404;
constexpr int kConflict = 409;

std::string now_utc() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900, tm.tm_mon + 1,
                tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<int>(ms));
  return buf;
}

bool valid_id(const std::string& id) {
  if (id.empty() || id.size() > 128) return false;
  for (char c : id)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_' && c != '.') return false;
  return id != "." && id != "..";
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ",") + s;
  return out;
}

void write_atomic(const fs::path& path, const std::string& contents) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << contents;
    if (!out) throw ServiceError(500, "cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

json calls_json(const std::vector<CellCall>& calls) {
  json out = json::array();
  for (const auto& c : calls) {
    out.push_back({{"cell_id", c.cell_id},
                   {"realness", study::to_string(c.realness)},
                   {"class_call", c.class_call ? json(dataset::to_string(*c.class_call)) : json(nullptr)}});
  }
  return out;
}

std::vector<study::RaterResponse> responses_from(const json& event) {
  std::vector<study::RaterResponse> out;
  for (const auto& c : event.at("calls")) {
    study::RaterResponse r;
    r.session_id = event.at("session_id").get<std::string>();
    r.experiment_index = event.at("experiment").get<int>();
    r.cell_id = c.at("cell_id").get<std::string>();
    r.realness = study::parse_realness(c.at("realness").get<std::string>());
    if (!c.at("class_call").is_null()) r.class_call = dataset::parse_nodule_class(c.at("class_call").get<std::string>());
    r.timestamp = event.at("time").get<std::string>();
    out.push_back(std::move(r));
  }
  return out;
}

// Shared by live submission and replay so a log can never hold a batch the
// service would have refused.
void check_batch(const SessionState& s, const study::StudyPlan& plan, int index, const std::vector<CellCall>& calls) {
  if (s.locked) throw ServiceError(kConflict, "session " + s.session_id + " is locked");
  if (index < 1 || index > study::kExperimentCount) {
    throw ServiceError(kNotFound, "experiment index " + std::to_string(index) + " outside 1.." +
                                      std::to_string(study::kExperimentCount));
  }
  if (s.completed.count(index)) {
    throw ServiceError(kConflict, "experiment " + std::to_string(index) + " already submitted");
  }
  const auto& grid = plan.experiment(index);
  std::set<std::string> seen;
  std::vector<std::string> unknown, repeated, class_errors;
  for (const auto& c : calls) {
    if (!grid.find(c.cell_id)) {
      unknown.push_back(c.cell_id);
      continue;
    }
    if (!seen.insert(c.cell_id).second) repeated.push_back(c.cell_id);
    if (c.class_call.has_value() != grid.spec.class_call_requested) class_errors.push_back(c.cell_id);
  }
  std::vector<std::string> missing;
  for (const auto& cell : grid.cells)
    if (!seen.count(cell.cell_id)) missing.push_back(cell.cell_id);
  std::string problems;
  auto note = [&](const char* what, const std::vector<std::string>& ids) {
    if (ids.empty()) return;
    problems += (problems.empty() ? "" : "; ") + std::string(what) + " " + join(ids);
  };
  note("missing cells", missing);
  note("unknown cells", unknown);
  note("repeated cells", repeated);
  note(grid.spec.class_call_requested ? "class call required for cells" : "class call not requested for cells",
       class_errors);
  if (!problems.empty()) {
    throw ServiceError(kBadRequest, "experiment " + std::to_string(index) + " responses rejected: " + problems);
  }
}

}  // namespace

StudyStore::StudyStore(fs::path root, std::string owner_token)
    : root_(std::move(root)), owner_token_(std::move(owner_token)) {
  const fs::path studies = root_ / "studies";
  fs::create_directories(studies);
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(studies))
    if (entry.is_directory()) dirs.push_back(entry.path());
  std::sort(dirs.begin(), dirs.end());
  for (const auto& dir : dirs) {
    const fs::path plan_path = dir / "plan.json";
    if (!fs::exists(plan_path)) continue;
    std::ifstream in(plan_path);
    Study st;
    try {
      st.plan = study::plan_from_json(json::parse(in));
    } catch (const std::exception& e) {
      throw ServiceError(500, plan_path.string() + ": " + e.what());
    }
    st.dir = dir;
    st.log = std::make_unique<EventLog>(dir / "events.log");
    const std::string id = st.plan.study_id;
    for (const auto& grid : st.plan.experiments)
      for (const auto& cell : grid.cells) images_[cell.image_id] = {id, dir / "images" / (cell.image_id + ".png")};
    auto [it, inserted] = studies_.emplace(id, std::move(st));
    if (!inserted) throw ServiceError(500, "study id " + id + " appears twice under " + studies.string());
    std::size_t line = 0;
    for (const auto& event : it->second.log->replayed()) {
      ++line;
      try {
        apply(it->second, event);
      } catch (const std::exception& e) {
        throw ServiceError(500, (dir / "events.log").string() + ": record " + std::to_string(line) +
                                    " cannot be replayed: " + e.what());
      }
    }
  }
}

void StudyStore::install_study(const fs::path& root, const study::ComposedStudy& composed) {
  const auto& plan = composed.plan;
  if (!valid_id(plan.study_id)) throw ServiceError(kBadRequest, "invalid study id '" + plan.study_id + "'");
  plan.validate();
  const fs::path dir = root / "studies" / plan.study_id;
  if (fs::exists(dir)) throw ServiceError(kConflict, "study " + plan.study_id + " already exists in " + root.string());
  const fs::path staging = root / "studies" / ("." + plan.study_id + ".staging");
  fs::remove_all(staging);
  fs::create_directories(staging / "images");
  for (const auto& grid : plan.experiments) {
    for (const auto& cell : grid.cells) {
      auto it = composed.images.find(cell.image_id);
      if (it == composed.images.end()) throw ServiceError(kBadRequest, "no image for id " + cell.image_id);
      imgproc::write_image(staging / "images" / (cell.image_id + ".png"), imgproc::denormalize(it->second.image()));
    }
  }
  write_atomic(staging / "plan.json", study::plan_to_json(plan).dump(2) + "\n");
  fs::rename(staging, dir);
}

std::vector<std::string> StudyStore::study_ids() const {
  std::lock_guard<std::mutex> lock(mutex_);
  std::vector<std::string> ids;
  for (const auto& [id, st] : studies_) ids.push_back(id);
  return ids;
}

const study::StudyPlan& StudyStore::plan(const std::string& study_id) const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = studies_.find(study_id);
  if (it == studies_.end()) throw ServiceError(kNotFound, "unknown study " + study_id);
  return it->second.plan;
}

StudyStore::Study& StudyStore::study_or_throw(const std::string& study_id) {
  auto it = studies_.find(study_id);
  if (it == studies_.end()) throw ServiceError(kNotFound, "unknown study " + study_id);
  return it->second;
}

SessionState& StudyStore::session_or_throw(const std::string& session_id) {
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw ServiceError(kNotFound, "unknown session " + session_id);
  return it->second;
}

const SessionState& StudyStore::session_or_throw(const std::string& session_id) const {
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw ServiceError(kNotFound, "unknown session " + session_id);
  return it->second;
}

std::string StudyStore::fresh_session_id() {
  static thread_local std::mt19937_64 rng(std::random_device{}());
  for (;;) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(rng()));
    if (!sessions_.count(buf)) return buf;
  }
}

void StudyStore::apply(Study& st, const json& event) {
  const std::string type = event.at("event").get<std::string>();
  const std::string session_id = event.at("session_id").get<std::string>();
  if (type == "session_open") {
    if (sessions_.count(session_id)) throw ServiceError(kConflict, "session " + session_id + " opened twice");
    SessionState s;
    s.session_id = session_id;
    s.rater_id = event.at("rater_id").get<std::string>();
    s.study_id = st.plan.study_id;
    sessions_.emplace(session_id, std::move(s));
    st.sessions.push_back(session_id);
    return;
  }
  SessionState& s = session_or_throw(session_id);
  if (s.study_id != st.plan.study_id) throw ServiceError(kConflict, "session " + session_id + " belongs to another study");
  if (type == "responses") {
    const int index = event.at("experiment").get<int>();
    auto responses = responses_from(event);
    std::vector<CellCall> calls;
    for (const auto& r : responses) calls.push_back({r.cell_id, r.realness, r.class_call});
    check_batch(s, st.plan, index, calls);
    s.completed.insert(index);
    s.responses.insert(s.responses.end(), responses.begin(), responses.end());
  } else if (type == "session_lock") {
    if (s.locked) throw ServiceError(kConflict, "session " + session_id + " locked twice");
    s.locked = true;
    s.forced = event.value("forced", false);
  } else {
    throw ServiceError(kBadRequest, "unknown event type '" + type + "'");
  }
}

SessionState StudyStore::create_session(const std::string& study_id, const std::string& rater_id) {
  if (!valid_id(rater_id)) throw ServiceError(kBadRequest, "invalid rater id '" + rater_id + "'");
  std::lock_guard<std::mutex> lock(mutex_);
  Study& st = study_or_throw(study_id);
  for (const auto& id : st.sessions) {
    const auto& s = sessions_.at(id);
    if (s.rater_id == rater_id && !s.locked) {
      throw ServiceError(kConflict, "rater " + rater_id + " already has open session " + id + " for study " + study_id);
    }
  }
  const json event = {{"event", "session_open"}, {"session_id", fresh_session_id()},
                      {"rater_id", rater_id}, {"time", now_utc()}};
  st.log->append(event);
  apply(st, event);
  return sessions_.at(event["session_id"].get<std::string>());
}

SessionState StudyStore::session(const std::string& session_id) const {
  std::lock_guard<std::mutex> lock(mutex_);
  return session_or_throw(session_id);
}

json StudyStore::grid_payload(const std::string& session_id, int experiment_index) const {
  std::lock_guard<std::mutex> lock(mutex_);
  const SessionState& s = session_or_throw(session_id);
  if (s.locked) throw ServiceError(kConflict, "session " + session_id + " is locked");
  if (experiment_index < 1 || experiment_index > study::kExperimentCount) {
    throw ServiceError(kNotFound, "experiment index " + std::to_string(experiment_index) + " outside 1.." +
                                      std::to_string(study::kExperimentCount));
  }
  const auto& grid = studies_.at(s.study_id).plan.experiment(experiment_index);
  json cells = json::array();
  for (const auto& cell : grid.cells) {
    cells.push_back({{"cell_id", cell.cell_id}, {"position", cell.position}, {"image", "/images/" + cell.image_id}});
  }
  return {{"session_id", s.session_id},
          {"experiment", experiment_index},
          {"rows", study::kGridSide},
          {"columns", study::kGridSide},
          {"class_call_requested", grid.spec.class_call_requested},
          {"completed", s.completed.count(experiment_index) > 0},
          {"cells", cells}};
}

SessionState StudyStore::submit(const std::string& session_id, int experiment_index, const std::vector<CellCall>& calls) {
  std::lock_guard<std::mutex> lock(mutex_);
  SessionState& s = session_or_throw(session_id);
  Study& st = studies_.at(s.study_id);
  check_batch(s, st.plan, experiment_index, calls);
  const json event = {{"event", "responses"}, {"session_id", session_id}, {"experiment", experiment_index},
                      {"time", now_utc()}, {"calls", calls_json(calls)}};
  st.log->append(event);
  apply(st, event);
  return s;
}

SessionState StudyStore::lock(const std::string& session_id) {
  std::lock_guard<std::mutex> guard(mutex_);
  SessionState& s = session_or_throw(session_id);
  if (s.locked) throw ServiceError(kConflict, "session " + session_id + " is already locked");
  Study& st = studies_.at(s.study_id);
  const json event = {{"event", "session_lock"}, {"session_id", session_id}, {"forced", false}, {"time", now_utc()}};
  st.log->append(event);
  apply(st, event);
  return s;
}

std::string StudyStore::score(const std::string& study_id, const std::string& owner_token, bool force) {
  std::lock_guard<std::mutex> guard(mutex_);
  if (owner_token_.empty() || owner_token != owner_token_) throw ServiceError(kForbidden, "owner token required");
  Study& st = study_or_throw(study_id);
  if (st.sessions.empty()) throw ServiceError(kConflict, "study " + study_id + " has no sessions to score");
  std::vector<std::string> open;
  for (const auto& id : st.sessions)
    if (!sessions_.at(id).locked) open.push_back(id);
  if (!open.empty() && !force) {
    throw ServiceError(kConflict, "open sessions: " + join(open) + " (lock them or score with force)");
  }
  for (const auto& id : open) {
    const json event = {{"event", "session_lock"}, {"session_id", id}, {"forced", true}, {"time", now_utc()}};
    st.log->append(event);
    apply(st, event);
  }
  std::vector<study::SessionRecord> records;
  for (const auto& id : st.sessions) {
    const auto& s = sessions_.at(id);
    records.push_back({s.session_id, s.rater_id, s.locked, s.responses});
  }
  const std::string report = study::serialize_report(study::summarize(st.plan, records));
  write_atomic(st.dir / "report.json", report);
  return report;
}

std::optional<fs::path> StudyStore::image_path(const std::string& image_id) const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = images_.find(image_id);
  if (it == images_.end()) return std::nullopt;
  return it->second.second;
}

void StudyStore::crash_on_next_append(const std::string& study_id) {
  std::lock_guard<std::mutex> lock(mutex_);
  study_or_throw(study_id).log->crash_on_next_append();
}

json StudyStore::session_json(const SessionState& s) {
  return {{"session_id", s.session_id},
          {"rater_id", s.rater_id},
          {"study_id", s.study_id},
          {"state", s.locked ? "locked" : "open"},
          {"completed", json(std::vector<int>(s.completed.begin(), s.completed.end()))},
          {"completed_count", s.completed.size()},
          {"experiments", study::kExperimentCount}};
}

std::vector<study::SessionRecord> sessions_from_log(const fs::path& events_log) {
  std::ifstream in(events_log);
  if (!in) throw ServiceError(kNotFound, "cannot open " + events_log.string());
  std::vector<study::SessionRecord> sessions;
  std::map<std::string, std::size_t> index;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json event = json::parse(line);
    const std::string type = event.at("event").get<std::string>();
    const std::string id = event.at("session_id").get<std::string>();
    if (type == "session_open") {
      index[id] = sessions.size();
      sessions.push_back({id, event.at("rater_id").get<std::string>(), false, {}});
    } else if (type == "responses") {
      auto r = responses_from(event);
      auto& s = sessions.at(index.at(id));
      s.responses.insert(s.responses.end(), r.begin(), r.end());
    } else if (type == "session_lock") {
      sessions.at(index.at(id)).locked = true;
    }
  }
  return sessions;
}

}  // namespace nodulegan::service
