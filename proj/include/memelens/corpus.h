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

#ifndef MEMELENS_CORPUS_H_
#define MEMELENS_CORPUS_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace memelens {

inline constexpr size_t kEmbeddingWidth = 768;

enum class Split { kUnassigned, kTrain, kValidation, kTest };

std::string_view SplitName(Split split);
std::optional<Split> ParseSplit(std::string_view name);

struct MemeRecord {
  std::string id;
  std::string img;
  std::string text;
  std::optional<int> label;  // 1 = hateful, 0 = benign
  Split split = Split::kUnassigned;

  bool operator==(const MemeRecord &) const = default;
};

struct NamedEntity {
  std::string surface;
  std::string category;  // e.g. NORP, PERSON

  bool operator==(const NamedEntity &) const = default;
};

// Probabilities over (contradiction, neutral, entailment) for the pair
// (meme text, image description).
struct NliProbabilities {
  double contradiction = 0.0;
  double neutral = 1.0;
  double entailment = 0.0;

  bool operator==(const NliProbabilities &) const = default;
};

// Row-major T x width matrix of encoder vectors, one row per token step.
class EmbeddingSequence {
 public:
  EmbeddingSequence() = default;
  EmbeddingSequence(size_t width, std::vector<double> values);

  size_t width() const { return width_; }
  size_t steps() const { return width_ == 0 ? 0 : values_.size() / width_; }
  bool empty() const { return values_.empty(); }
  std::span<const double> step(size_t t) const {
    return std::span<const double>(values_).subspan(t * width_, width_);
  }
  std::span<const double> values() const { return values_; }

  bool operator==(const EmbeddingSequence &) const = default;

 private:
  size_t width_ = kEmbeddingWidth;
  std::vector<double> values_;
};

// Precomputed perception outputs for one meme.
struct AnnotationBundle {
  std::string id;
  std::string caption;
  std::vector<std::string> objects;
  std::vector<std::string> web_entities;
  std::vector<NamedEntity> named_entities;
  NliProbabilities nli;
  EmbeddingSequence embedding_seq;

  bool operator==(const AnnotationBundle &) const = default;
};

// Throws ValidationError when the bundle breaks its invariants.
void ValidateAnnotation(const AnnotationBundle &bundle);

// Immutable set of memes and their annotation sidecar.
class Corpus {
 public:
  Corpus() = default;
  // Validates ids, labels and annotations; throws ValidationError.
  Corpus(std::vector<MemeRecord> records,
         std::map<std::string, AnnotationBundle> annotations,
         uint64_t split_seed = 0);

  std::span<const MemeRecord> records() const { return records_; }
  const std::map<std::string, AnnotationBundle> &annotations() const {
    return annotations_;
  }
  uint64_t split_seed() const { return split_seed_; }
  size_t size() const { return records_.size(); }

  const MemeRecord *Find(std::string_view id) const;
  const AnnotationBundle *Annotation(std::string_view id) const;

  // A record can feed a model only if it has an annotation bundle.
  bool Usable(std::string_view id) const { return Annotation(id) != nullptr; }

  // Usable records in the given split, in file order.
  std::vector<const MemeRecord *> InSplit(Split split) const;
  // Usable and labeled records in file order.
  std::vector<const MemeRecord *> Labeled() const;

 private:
  std::vector<MemeRecord> records_;
  std::map<std::string, AnnotationBundle> annotations_;
  std::map<std::string, size_t, std::less<>> index_;
  uint64_t split_seed_ = 0;
};

Corpus LoadCorpus(const std::filesystem::path &memes_path,
                  const std::filesystem::path &annotations_path);

std::vector<MemeRecord> ReadMemes(const std::filesystem::path &path);
std::map<std::string, AnnotationBundle> ReadAnnotations(
    const std::filesystem::path &path);

void WriteMemes(const std::filesystem::path &path,
                std::span<const MemeRecord> records);
void WriteAnnotations(const std::filesystem::path &path,
                      const std::map<std::string, AnnotationBundle> &bundles);

// Stratified 80/10/10 train/validation/test assignment of the labeled
// records. Pure in (labeled id set, labels, seed). Unlabeled records stay
// kUnassigned. Throws InsufficientDataError below 10 labeled records.
Corpus AssignSplits(const Corpus &corpus, uint64_t seed);

struct Fold {
  std::vector<std::string> train_ids;
  std::vector<std::string> holdout_ids;
};

// Stratified k-fold partition of the labeled, non-test records.
std::vector<Fold> MakeFolds(const Corpus &corpus, int k, uint64_t seed);

}  // namespace memelens

#endif  // MEMELENS_CORPUS_H_
