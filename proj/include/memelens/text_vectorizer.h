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

#ifndef MEMELENS_TEXT_VECTORIZER_H_
#define MEMELENS_TEXT_VECTORIZER_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "memelens/corpus.h"
#include "memelens/lexicon_features.h"

namespace memelens {

struct SparseEntry {
  uint32_t index;
  double value;

  bool operator==(const SparseEntry &) const = default;
};

// Sorted (index, value) pairs over a logical dimension.
struct SparseVector {
  std::vector<SparseEntry> entries;
  size_t dim = 0;

  // Value at `index`, zero when absent. Binary search.
  double At(uint32_t index) const;
  // Indices strictly increasing and < dim, values finite and nonzero.
  bool IsValid() const;

  bool operator==(const SparseVector &) const = default;
};

// Tokens of text, caption, objects and web entities in that order, followed
// by one ent_<surface>_<category> token per named entity.
std::vector<std::string> ComposeJointText(const MemeRecord &record,
                                          const AnnotationBundle &bundle);

// Synthetic token for a named entity: lowercased, whitespace runs become '_'.
std::string EntityToken(const NamedEntity &entity);

class Vocabulary {
 public:
  Vocabulary() = default;

  // Document frequencies are counted once per document. Terms are indexed in
  // lexicographic order. Throws std::invalid_argument on an empty collection.
  static Vocabulary Fit(std::span<const std::vector<std::string>> documents,
                        size_t min_df = 2,
                        std::optional<size_t> max_features = std::nullopt);

  size_t size() const { return terms_.size(); }
  size_t document_count() const { return document_count_; }
  const std::string &term(uint32_t index) const { return terms_[index]; }
  uint32_t df(uint32_t index) const { return df_[index]; }
  std::optional<uint32_t> Find(const std::string &term) const;
  const std::vector<std::string> &terms() const { return terms_; }

  // ln((1 + N) / (1 + df)) + 1
  double Idf(uint32_t index) const;

  void Save(const std::filesystem::path &path) const;
  // Throws ModelError on a malformed or wrong-version file.
  static Vocabulary Load(const std::filesystem::path &path);

  bool operator==(const Vocabulary &other) const {
    return terms_ == other.terms_ && df_ == other.df_ &&
           document_count_ == other.document_count_;
  }

 private:
  std::vector<std::string> terms_;
  std::vector<uint32_t> df_;
  std::unordered_map<std::string, uint32_t> index_;
  size_t document_count_ = 0;

  void Reindex();
};

// Raw term counts times smoothed idf, L2-normalized; out-of-vocabulary
// tokens are dropped.
SparseVector TransformTfidf(std::span<const std::string> tokens,
                            const Vocabulary &vocab);

// Engineered block at [0, 13), tf-idf shifted by 13. Zeros omitted.
SparseVector AssembleInput(const EngineeredVector &engineered,
                           const SparseVector &tfidf);

// Model input column names: engineered names, then vocabulary terms.
std::vector<std::string> InputFeatureNames(const Vocabulary &vocab);

}  // namespace memelens

#endif  // MEMELENS_TEXT_VECTORIZER_H_
