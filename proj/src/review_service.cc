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

#include "memelens/review_service.h"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <ctime>
#include <fstream>

#include "memelens/errors.h"

namespace memelens {

using json = nlohmann::json;

std::optional<QueueSort> ParseQueueSort(std::string_view name) {
  if (name.empty() || name == "score") return QueueSort::kScoreDescending;
  if (name == "id") return QueueSort::kIdAscending;
  return std::nullopt;
}

namespace {

std::string NowIso8601() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json LabelJson(const HumanLabel &l) {
  return {{"id", l.id},
          {"label", l.label},
          {"annotator", l.annotator},
          {"labeled_at", l.labeled_at}};
}

}  // namespace

LabelStore::LabelStore(std::filesystem::path path) : path_(std::move(path)) {
  if (std::filesystem::exists(path_)) {
    std::ifstream in(path_);
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(in, line)) lines.push_back(line);
    for (size_t i = 0; i < lines.size(); ++i) {
      if (lines[i].empty()) continue;
      json obj = json::parse(lines[i], nullptr, false);
      if (obj.is_discarded() || !obj.is_object()) {
        // A torn final line means a crash mid-append; the label was never
        // acknowledged, so dropping it is safe.
        if (i + 1 == lines.size()) break;
        throw ParseError(path_.string(), i + 1, "malformed label record");
      }
      HumanLabel l;
      try {
        l.id = obj.at("id").get<std::string>();
        l.label = obj.at("label").get<int>();
        l.annotator = obj.value("annotator", std::string());
        l.labeled_at = obj.value("labeled_at", std::string());
      } catch (const json::exception &e) {
        throw ParseError(path_.string(), i + 1, e.what());
      }
      labels_.try_emplace(l.id, l);
    }
  } else if (path_.has_parent_path()) {
    std::filesystem::create_directories(path_.parent_path());
  }
  fd_ = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd_ < 0) {
    throw std::runtime_error("cannot open label log " + path_.string() + ": " +
                             std::strerror(errno));
  }
}

LabelStore::~LabelStore() {
  if (fd_ >= 0) ::close(fd_);
}

std::optional<HumanLabel> LabelStore::Find(const std::string &id) const {
  std::lock_guard lock(mu_);
  auto it = labels_.find(id);
  if (it == labels_.end()) return std::nullopt;
  return it->second;
}

std::map<std::string, HumanLabel> LabelStore::Snapshot() const {
  std::lock_guard lock(mu_);
  return labels_;
}

HumanLabel LabelStore::Submit(const std::string &id, int label,
                              const std::string &annotator) {
  if (label != 0 && label != 1) {
    throw std::invalid_argument("label must be 0 or 1");
  }
  std::lock_guard lock(mu_);
  if (auto it = labels_.find(id); it != labels_.end()) {
    if (it->second.label == label) return it->second;
    throw ConflictError("meme '" + id + "' is already labeled " +
                        std::to_string(it->second.label));
  }
  HumanLabel l{id, label, annotator, NowIso8601()};
  const std::string line = LabelJson(l).dump() + "\n";
  size_t written = 0;
  while (written < line.size()) {
    const ssize_t n = ::write(fd_, line.data() + written, line.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw std::runtime_error("label log write failed: " +
                               std::string(std::strerror(errno)));
    }
    written += static_cast<size_t>(n);
  }
  if (::fsync(fd_) != 0) {
    throw std::runtime_error("label log fsync failed: " +
                             std::string(std::strerror(errno)));
  }
  labels_.emplace(id, l);
  return l;
}

std::vector<const AugmentedMeme *> BuildQueue(
    const std::vector<AugmentedMeme> &scored, double threshold,
    QueueSort sort) {
  std::vector<const AugmentedMeme *> out;
  for (const auto &m : scored) {
    if (m.score >= threshold) out.push_back(&m);
  }
  std::sort(out.begin(), out.end(),
            [sort](const AugmentedMeme *a, const AugmentedMeme *b) {
              if (sort == QueueSort::kScoreDescending && a->score != b->score) {
                return a->score > b->score;
              }
              return a->id < b->id;
            });
  return out;
}

ReviewService::ReviewService(std::vector<AugmentedMeme> scored,
                             std::map<std::string, std::string> images,
                             double flag_threshold,
                             const std::filesystem::path &label_log)
    : scored_(std::move(scored)),
      images_(std::move(images)),
      flag_threshold_(flag_threshold),
      store_(label_log) {
  for (size_t i = 0; i < scored_.size(); ++i) {
    if (!index_.emplace(scored_[i].id, i).second) {
      throw ValidationError("duplicate scored meme '" + scored_[i].id + "'");
    }
  }
}

ReviewItem ReviewService::MakeItem(const AugmentedMeme &meme) const {
  ReviewItem item;
  item.id = meme.id;
  if (auto it = images_.find(meme.id); it != images_.end()) item.img = it->second;
  item.augmentation = meme;
  item.human = store_.Find(meme.id);
  item.status = item.human ? ReviewStatus::kLabeled : ReviewStatus::kPending;
  return item;
}

std::vector<ReviewItem> ReviewService::Queue(double threshold,
                                             QueueSort sort) const {
  std::vector<ReviewItem> items;
  for (const AugmentedMeme *m : BuildQueue(scored_, threshold, sort)) {
    items.push_back(MakeItem(*m));
  }
  return items;
}

ReviewItem ReviewService::Get(const std::string &id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw NotFoundError("no meme with id '" + id + "'");
  return MakeItem(scored_[it->second]);
}

ReviewItem ReviewService::SubmitLabel(const std::string &id, int label,
                                      const std::string &annotator) {
  auto it = index_.find(id);
  if (it == index_.end()) throw NotFoundError("no meme with id '" + id + "'");
  store_.Submit(id, label, annotator);
  return MakeItem(scored_[it->second]);
}

AgreementStats ReviewService::Agreement() const {
  AgreementStats s;
  size_t agree = 0, human_pos = 0, model_pos = 0;
  for (const auto &[id, l] : store_.Snapshot()) {
    auto it = index_.find(id);
    if (it == index_.end()) continue;
    const bool model = scored_[it->second].score >= flag_threshold_;
    const bool human = l.label == 1;
    ++s.n_reviewed;
    if (model == human) ++agree;
    if (human) ++human_pos;
    if (model) ++model_pos;
    if (model && human) {
      ++s.both_positive;
    } else if (model) {
      ++s.model_only_positive;
    } else if (human) {
      ++s.human_only_positive;
    } else {
      ++s.both_negative;
    }
  }
  if (s.n_reviewed > 0) {
    const double n = static_cast<double>(s.n_reviewed);
    s.agreement = static_cast<double>(agree) / n;
    s.human_positive_rate = static_cast<double>(human_pos) / n;
    s.model_positive_rate = static_cast<double>(model_pos) / n;
  }
  return s;
}

const std::string &ReviewService::ImagePath(const std::string &id) const {
  auto it = images_.find(id);
  if (it == images_.end() || it->second.empty()) {
    throw NotFoundError("no image for meme '" + id + "'");
  }
  return it->second;
}

json ToJson(const ReviewItem &item) {
  json j = {{"id", item.id},
            {"img", item.img},
            {"status", item.status == ReviewStatus::kLabeled ? "labeled"
                                                             : "pending"},
            {"human_label", nullptr},
            {"labeled_at", nullptr},
            {"annotator", nullptr},
            {"augmentation", ToJson(item.augmentation)}};
  if (item.human) {
    j["human_label"] = item.human->label;
    j["labeled_at"] = item.human->labeled_at;
    j["annotator"] = item.human->annotator;
  }
  return j;
}

json ToJson(const AgreementStats &s) {
  return {{"n_reviewed", s.n_reviewed},
          {"agreement", s.agreement},
          {"human_positive_rate", s.human_positive_rate},
          {"model_positive_rate", s.model_positive_rate},
          {"confusion",
           {{"model_1_human_1", s.both_positive},
            {"model_1_human_0", s.model_only_positive},
            {"model_0_human_1", s.human_only_positive},
            {"model_0_human_0", s.both_negative}}}};
}

}  // namespace memelens
