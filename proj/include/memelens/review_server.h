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

#ifndef MEMELENS_REVIEW_SERVER_H_
#define MEMELENS_REVIEW_SERVER_H_

#include <filesystem>
#include <memory>
#include <string>

#include "json.hpp"
#include "memelens/review_service.h"

namespace httplib {
class Server;
}

namespace memelens {

inline constexpr const char *kVersion = "0.1.0";

// HTTP front end for ReviewService:
//   GET  /api/queue?threshold=&sort=score|id
//   GET  /api/memes/{id}
//   GET  /api/memes/{id}/image
//   POST /api/memes/{id}/label   {"label": 0|1, "annotator": "..."}
//   GET  /api/stats/agreement
//   GET  /api/health
class ReviewServer {
 public:
  // `image_root` is the directory meme image paths are relative to.
  // `health` is merged into the /api/health payload.
  ReviewServer(ReviewService &service, std::filesystem::path image_root,
               nlohmann::json health = nlohmann::json::object());
  ~ReviewServer();

  // Serves static files (e.g. a built UI) under "/".
  bool MountStatic(const std::filesystem::path &dir);

  // Returns the bound port, or -1.
  int BindToAnyPort(const std::string &host);
  bool Bind(const std::string &host, int port);
  // Blocks until Stop().
  bool ListenAfterBind();
  void Stop();
  bool IsRunning() const;
  void WaitUntilReady() const;

 private:
  void Routes();

  ReviewService &service_;
  std::filesystem::path image_root_;
  nlohmann::json health_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace memelens

#endif  // MEMELENS_REVIEW_SERVER_H_
