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

#include "nodulegan/service/server.hpp"

#include <fstream>
#include <sstream>

#include "httplib.h"

namespace nodulegan::service {

using nlohmann::json;

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, status, {{"error", message}});
}

// Runs a handler, mapping failures onto JSON error responses.
template <typename F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const ServiceError& e) {
      send_error(res, e.status(), e.what());
    } catch (const json::exception& e) {
      send_error(res, 400, std::string("malformed request: ") + e.what());
    } catch (const study::StudyError& e) {
      send_error(res, 409, e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, e.what());
    }
  };
}

json body_json(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  json j = json::parse(req.body);
  if (!j.is_object()) throw ServiceError(400, "request body must be a JSON object");
  return j;
}

int parse_index(const std::string& text) {
  try {
    std::size_t used = 0;
    const int n = std::stoi(text, &used);
    if (used == text.size()) return n;
  } catch (const std::exception&) {
  }
  throw ServiceError(404, "bad experiment index '" + text + "'");
}

std::vector<CellCall> parse_calls(const json& body) {
  if (!body.contains("responses") || !body["responses"].is_array()) {
    throw ServiceError(400, "body needs a \"responses\" array");
  }
  std::vector<CellCall> calls;
  for (const auto& item : body["responses"]) {
    CellCall c;
    c.cell_id = item.at("cell_id").get<std::string>();
    try {
      c.realness = study::parse_realness(item.at("realness").get<std::string>());
      if (item.contains("class_call") && !item["class_call"].is_null()) {
        c.class_call = dataset::parse_nodule_class(item["class_call"].get<std::string>());
      }
    } catch (const study::StudyError& e) {
      throw ServiceError(400, "cell " + c.cell_id + ": " + e.what());
    } catch (const dataset::DatasetError& e) {
      throw ServiceError(400, "cell " + c.cell_id + ": " + e.what());
    }
    calls.push_back(std::move(c));
  }
  return calls;
}

}  // namespace

struct Server::Impl {
  StudyStore& store;
  ServerOptions options;
  httplib::Server http;
  int port = -1;

  Impl(StudyStore& s, ServerOptions o) : store(s), options(std::move(o)) {}

  void routes() {
    http.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                              {"Access-Control-Allow-Headers", "Content-Type, X-Owner-Token"},
                              {"Cache-Control", "no-store"}});
    http.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    http.Post(R"(/studies/([A-Za-z0-9._-]+)/sessions)", guarded([this](const auto& req, auto& res) {
                const json body = body_json(req);
                const auto s = store.create_session(req.matches[1], body.at("rater_id").template get<std::string>());
                send_json(res, 201, StudyStore::session_json(s));
              }));
    http.Get(R"(/sessions/([A-Za-z0-9]+))", guarded([this](const auto& req, auto& res) {
               send_json(res, 200, StudyStore::session_json(store.session(req.matches[1])));
             }));
    http.Get(R"(/sessions/([A-Za-z0-9]+)/grids/([^/]+))", guarded([this](const auto& req, auto& res) {
               send_json(res, 200, store.grid_payload(req.matches[1], parse_index(req.matches[2])));
             }));
    http.Post(R"(/sessions/([A-Za-z0-9]+)/grids/([^/]+)/responses)", guarded([this](const auto& req, auto& res) {
                const int index = parse_index(req.matches[2]);
                const auto s = store.submit(req.matches[1], index, parse_calls(body_json(req)));
                json ack = StudyStore::session_json(s);
                ack["accepted"] = index;
                send_json(res, 200, ack);
              }));
    http.Post(R"(/sessions/([A-Za-z0-9]+)/lock)", guarded([this](const auto& req, auto& res) {
                send_json(res, 200, StudyStore::session_json(store.lock(req.matches[1])));
              }));
    http.Post(R"(/studies/([A-Za-z0-9._-]+)/score)", guarded([this](const auto& req, auto& res) {
                const json body = body_json(req);
                const bool force = body.value("force", false);
                const std::string report = store.score(req.matches[1], req.get_header_value("X-Owner-Token"), force);
                res.status = 200;
                res.set_content(report, "application/json");
              }));
    http.Get(R"(/images/([A-Za-z0-9]+))", guarded([this](const auto& req, auto& res) {
               const auto path = store.image_path(req.matches[1]);
               if (!path) throw ServiceError(404, "unknown image");
               std::ifstream in(*path, std::ios::binary);
               if (!in) throw ServiceError(404, "unknown image");
               std::ostringstream ss;
               ss << in.rdbuf();
               res.status = 200;
               res.set_content(ss.str(), "image/png");
             }));
    if (options.static_dir) {
      if (!http.set_mount_point("/", options.static_dir->string())) {
        throw ServiceError(500, "cannot serve static files from " + options.static_dir->string());
      }
    }
    http.set_error_handler([](const httplib::Request&, httplib::Response& res) {
      if (res.body.empty()) send_error(res, res.status, "no such endpoint");
    });
  }
};

Server::Server(StudyStore& store, ServerOptions options) : impl_(std::make_unique<Impl>(store, std::move(options))) {
  impl_->routes();
}

Server::~Server() { stop(); }

int Server::bind() {
  if (impl_->options.port == 0) {
    impl_->port = impl_->http.bind_to_any_port(impl_->options.host);
  } else if (impl_->http.bind_to_port(impl_->options.host, impl_->options.port)) {
    impl_->port = impl_->options.port;
  }
  if (impl_->port < 0) {
    throw ServiceError(500, "cannot bind " + impl_->options.host + ":" + std::to_string(impl_->options.port));
  }
  return impl_->port;
}

void Server::run() {
  if (!impl_->http.listen_after_bind()) throw ServiceError(500, "server stopped with an error");
}

void Server::stop() {
  if (impl_->http.is_running()) impl_->http.stop();
}

void Server::wait_until_ready() const { impl_->http.wait_until_ready(); }

}  // namespace nodulegan::service
