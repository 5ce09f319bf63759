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

#ifndef MEMELENS_FEATURES_H_
#define MEMELENS_FEATURES_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "memelens/corpus.h"
#include "memelens/lexicon_features.h"
#include "memelens/text_vectorizer.h"

namespace memelens {

struct TfidfOptions {
  size_t min_df = 2;
  std::optional<size_t> max_features;
};

// Engineered block plus joint tf-idf, the full sparse model input for one
// meme.
class FeaturePipeline {
 public:
  FeaturePipeline(LexiconSet lexicons, Vocabulary vocab);

  // Fits the vocabulary on the joint text of the given records. Every record
  // must have an annotation bundle.
  static Vocabulary FitVocabulary(const Corpus &corpus,
                                  std::span<const MemeRecord *const> records,
                                  const TfidfOptions &options);

  SparseVector Row(const MemeRecord &record,
                   const AnnotationBundle &bundle) const;

  const LexiconSet &lexicons() const { return lexicons_; }
  const Vocabulary &vocabulary() const { return vocab_; }
  const std::vector<std::string> &feature_names() const { return names_; }
  size_t dim() const { return names_.size(); }

 private:
  LexiconSet lexicons_;
  Vocabulary vocab_;
  std::vector<std::string> names_;
};

}  // namespace memelens

#endif  // MEMELENS_FEATURES_H_
