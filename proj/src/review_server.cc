// Copyright 2026 The memelens Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "memelens/review_server.h"

#include <fstream>
#include <sstream>

#include "httplib.h"
#include "memelens/errors.h"
#include "memelens/numeric_io.h"
#include "memelens/simd/kernels.h"

namespace memelens {

using json = nlohmann::json;

namespace {

void SendJson(httplib::Response &res, int status, const json &body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void SendError(httplib::Response &res, int status, const std::string &what) {
  SendJson(res, status, {{"error", what}});
}

std::string ContentType(const std::filesystem::path &p) {
  std::string ext = p.extension().string();
  for (char &c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (ext == ".png") return "image/png";
  if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
  if (ext == ".gif") return "image/gif";
  if (ext == ".webp") return "image/webp";
  return "application/octet-stream";
}

// Paths from the corpus may not climb out of the image root.
bool IsContained(const std::filesystem::path &relative) {
  if (relative.is_absolute()) return false;
  for (const auto &part : relative) {
    if (part == "..") return false;
  }
  return true;
}

}  // namespace

ReviewServer::ReviewServer(ReviewService &service,
                           std::filesystem::path image_root, json health)
    : service_(service),
      image_root_(std::move(image_root)),
      health_(std::move(health)),
      server_(std::make_unique<httplib::Server>()) {
  Routes();
}

ReviewServer::~ReviewServer() = default;

void ReviewServer::Routes() {
  server_->set_default_headers({{"Access-Control-Allow-Origin", "*"}});

  server_->Get("/api/health", [this](const httplib::Request &,
                                     httplib::Response &res) {
    json body = {{"status", "ok"},
                 {"name", "memelens"},
                 {"version", kVersion},
                 {"simd", std::string(simd::IsaName(simd::Active().isa))},
                 {"items", service_.size()},
                 {"threshold", service_.flag_threshold()}};
    body.update(health_);
    SendJson(res, 200, body);
  });

  server_->Get("/api/queue", [this](const httplib::Request &req,
                                    httplib::Response &res) {
    double threshold = service_.flag_threshold();
    if (req.has_param("threshold") && !req.get_param_value("threshold").empty()) {
      auto t = ParseDouble(req.get_param_value("threshold"));
      if (!t || !(*t >= 0.0 && *t <= 1.0)) {
        return SendError(res, 400, "threshold must be a number in [0, 1]");
      }
      threshold = *t;
    }
    auto sort = ParseQueueSort(req.has_param("sort") ? req.get_param_value("sort")
                                                     : "");
    if (!sort) return SendError(res, 400, "sort must be 'score' or 'id'");
    json items = json::array();
    for (const auto &item : service_.Queue(threshold, *sort)) {
      items.push_back(ToJson(item));
    }
    SendJson(res, 200, items);
  });

  server_->Get(R"(/api/memes/([^/]+))", [this](const httplib::Request &req,
                                               httplib::Response &res) {
    try {
      SendJson(res, 200, ToJson(service_.Get(req.matches[1])));
    } catch (const NotFoundError &e) {
      SendError(res, 404, e.what());
    }
  });

  server_->Get(R"(/api/memes/([^/]+)/image)", [this](const httplib::Request &req,
                                                     httplib::Response &res) {
    try {
      const std::filesystem::path rel = service_.ImagePath(req.matches[1]);
      if (!IsContained(rel)) return SendError(res, 404, "image path rejected");
      const auto full = image_root_ / rel;
      std::ifstream in(full, std::ios::binary);
      if (!in) return SendError(res, 404, "image file missing");
      std::ostringstream buf;
      buf << in.rdbuf();
      res.status = 200;
      res.set_content(buf.str(), ContentType(full));
    } catch (const NotFoundError &e) {
      SendError(res, 404, e.what());
    }
  });

  server_->Post(R"(/api/memes/([^/]+)/label)", [this](const httplib::Request &req,
                                                      httplib::Response &res) {
    const std::string id = req.matches[1];
    json body = json::parse(req.body, nullptr, false);
    if (body.is_discarded() || !body.is_object() || !body.contains("label") ||
        !body["label"].is_number_integer()) {
      return SendError(res, 400, "body must be {\"label\": 0|1, \"annotator\": ...}");
    }
    const int label = body["label"].get<int>();
    if (label != 0 && label != 1) return SendError(res, 400, "label must be 0 or 1");
    std::string annotator;
    if (auto a = body.find("annotator"); a != body.end() && a->is_string()) {
      annotator = a->get<std::string>();
    }
    try {
      SendJson(res, 200, ToJson(service_.SubmitLabel(id, label, annotator)));
    } catch (const NotFoundError &e) {
      SendError(res, 404, e.what());
    } catch (const ConflictError &e) {
      json err = {{"error", e.what()}, {"item", ToJson(service_.Get(id))}};
      SendJson(res, 409, err);
    }
  });

  server_->Get("/api/stats/agreement", [this](const httplib::Request &,
                                              httplib::Response &res) {
    SendJson(res, 200, ToJson(service_.Agreement()));
  });

  server_->set_exception_handler([](const httplib::Request &,
                                    httplib::Response &res,
                                    std::exception_ptr ep) {
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception &e) {
      SendError(res, 500, e.what());
    } catch (...) {
      SendError(res, 500, "internal error");
    }
  });
}

bool ReviewServer::MountStatic(const std::filesystem::path &dir) {
  return server_->set_mount_point("/", dir.string());
}

int ReviewServer::BindToAnyPort(const std::string &host) {
  return server_->bind_to_any_port(host);
}

bool ReviewServer::Bind(const std::string &host, int port) {
  return server_->bind_to_port(host, port);
}

bool ReviewServer::ListenAfterBind() { return server_->listen_after_bind(); }

void ReviewServer::Stop() { server_->stop(); }

bool ReviewServer::IsRunning() const { return server_->is_running(); }

void ReviewServer::WaitUntilReady() const { server_->wait_until_ready(); }

}  // namespace memelens
