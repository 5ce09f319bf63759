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

#ifndef MEMELENS_AUGMENT_H_
#define MEMELENS_AUGMENT_H_

#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "memelens/features.h"
#include "memelens/gbdt.h"

namespace memelens {

enum class FeatureChannel { kEngineered, kTextTerm, kNamedEntity };

// "engineered", "text-term" or "named-entity".
std::string_view ChannelName(FeatureChannel channel);

// Columns below 13 are engineered; ent_* terms are named entities; anything
// else is a plain text term.
FeatureChannel ChannelFor(uint32_t index, std::string_view name);

struct TopFeature {
  std::string name;
  FeatureChannel channel = FeatureChannel::kTextTerm;
  double contribution = 0.0;
};

// What a moderator sees next to a flagged meme.
struct AugmentedMeme {
  std::string id;
  std::string text;
  std::string caption;
  double score = 0.0;
  int predicted_label = 0;
  double threshold = 0.5;
  std::vector<TopFeature> top_features;  // |contribution| descending
  EngineeredVector engineered{};
};

// Throws ModelError when the model is untrained or its dimension does not
// match the pipeline.
AugmentedMeme AugmentMeme(const MemeRecord &record,
                          const AnnotationBundle &bundle,
                          const GbdtModel &model,
                          const FeaturePipeline &pipeline, size_t top_k = 8,
                          double threshold = 0.5);

nlohmann::json ToJson(const AugmentedMeme &meme);

}  // namespace memelens

#endif  // MEMELENS_AUGMENT_H_
