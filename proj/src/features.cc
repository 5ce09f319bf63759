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

#include "memelens/features.h"

#include "memelens/errors.h"

namespace memelens {

FeaturePipeline::FeaturePipeline(LexiconSet lexicons, Vocabulary vocab)
    : lexicons_(std::move(lexicons)),
      vocab_(std::move(vocab)),
      names_(InputFeatureNames(vocab_)) {}

Vocabulary FeaturePipeline::FitVocabulary(
    const Corpus &corpus, std::span<const MemeRecord *const> records,
    const TfidfOptions &options) {
  std::vector<std::vector<std::string>> docs;
  docs.reserve(records.size());
  for (const MemeRecord *r : records) {
    const AnnotationBundle *b = corpus.Annotation(r->id);
    if (!b) throw DataError("meme '" + r->id + "' has no annotation bundle");
    docs.push_back(ComposeJointText(*r, *b));
  }
  return Vocabulary::Fit(docs, options.min_df, options.max_features);
}

SparseVector FeaturePipeline::Row(const MemeRecord &record,
                                  const AnnotationBundle &bundle) const {
  return AssembleInput(BuildEngineered(record, bundle, lexicons_),
                       TransformTfidf(ComposeJointText(record, bundle), vocab_));
}

}  // namespace memelens
