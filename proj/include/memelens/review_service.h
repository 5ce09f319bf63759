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

#ifndef MEMELENS_REVIEW_SERVICE_H_
#define MEMELENS_REVIEW_SERVICE_H_

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "memelens/augment.h"

namespace memelens {

enum class ReviewStatus { kPending, kLabeled };
enum class QueueSort { kScoreDescending, kIdAscending };

// "score" or "id".
std::optional<QueueSort> ParseQueueSort(std::string_view name);

struct HumanLabel {
  std::string id;
  int label = 0;
  std::string annotator;
  std::string labeled_at;  // ISO 8601, UTC
};

struct ReviewItem {
  std::string id;
  std::string img;
  AugmentedMeme augmentation;
  ReviewStatus status = ReviewStatus::kPending;
  std::optional<HumanLabel> human;
};

struct AgreementStats {
  size_t n_reviewed = 0;
  double agreement = 0.0;
  double human_positive_rate = 0.0;
  double model_positive_rate = 0.0;
  // Model prediction vs human label.
  size_t both_positive = 0;
  size_t model_only_positive = 0;
  size_t human_only_positive = 0;
  size_t both_negative = 0;
};

// Append-only JSON-lines log of human decisions, replayed on open. Every
// accepted label is fsync'ed before Submit returns.
class LabelStore {
 public:
  explicit LabelStore(std::filesystem::path path);
  ~LabelStore();
  LabelStore(const LabelStore &) = delete;
  LabelStore &operator=(const LabelStore &) = delete;

  std::optional<HumanLabel> Find(const std::string &id) const;
  std::map<std::string, HumanLabel> Snapshot() const;

  // Returns the stored label. Re-submitting the same label is a no-op;
  // a different label throws ConflictError and leaves the store unchanged.
  HumanLabel Submit(const std::string &id, int label,
                    const std::string &annotator);

  const std::filesystem::path &path() const { return path_; }

 private:
  std::filesystem::path path_;
  mutable std::mutex mu_;
  std::map<std::string, HumanLabel> labels_;
  int fd_ = -1;
};

// Items with score >= threshold, ordered by score descending (ties by id)
// or by id.
std::vector<const AugmentedMeme *> BuildQueue(
    const std::vector<AugmentedMeme> &scored, double threshold, QueueSort sort);

// The review queue over a fixed set of scored memes. Model state is
// immutable; only the label store changes.
class ReviewService {
 public:
  // `images` maps meme id to its image path relative to the corpus root.
  ReviewService(std::vector<AugmentedMeme> scored,
                std::map<std::string, std::string> images,
                double flag_threshold, const std::filesystem::path &label_log);

  double flag_threshold() const { return flag_threshold_; }
  size_t size() const { return scored_.size(); }

  std::vector<ReviewItem> Queue(double threshold, QueueSort sort) const;
  std::vector<ReviewItem> Queue() const {
    return Queue(flag_threshold_, QueueSort::kScoreDescending);
  }

  // Throws NotFoundError.
  ReviewItem Get(const std::string &id) const;
  // Throws NotFoundError, ConflictError or std::invalid_argument.
  ReviewItem SubmitLabel(const std::string &id, int label,
                         const std::string &annotator);

  // Over labeled items only; the model label is score >= flag_threshold.
  AgreementStats Agreement() const;

  // Relative image path for an id. Throws NotFoundError.
  const std::string &ImagePath(const std::string &id) const;

 private:
  ReviewItem MakeItem(const AugmentedMeme &meme) const;

  std::vector<AugmentedMeme> scored_;
  std::map<std::string, size_t> index_;
  std::map<std::string, std::string> images_;
  double flag_threshold_;
  mutable LabelStore store_;
};

nlohmann::json ToJson(const ReviewItem &item);
nlohmann::json ToJson(const AgreementStats &stats);

}  // namespace memelens

#endif  // MEMELENS_REVIEW_SERVICE_H_
