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

#include "memelens/augment.h"

#include "memelens/errors.h"

namespace memelens {

std::string_view ChannelName(FeatureChannel channel) {
  switch (channel) {
    case FeatureChannel::kEngineered:
      return "engineered";
    case FeatureChannel::kTextTerm:
      return "text-term";
    case FeatureChannel::kNamedEntity:
      return "named-entity";
  }
  return "text-term";
}

FeatureChannel ChannelFor(uint32_t index, std::string_view name) {
  if (index < kEngineeredDim) return FeatureChannel::kEngineered;
  if (name.starts_with("ent_")) return FeatureChannel::kNamedEntity;
  return FeatureChannel::kTextTerm;
}

AugmentedMeme AugmentMeme(const MemeRecord &record,
                          const AnnotationBundle &bundle,
                          const GbdtModel &model,
                          const FeaturePipeline &pipeline, size_t top_k,
                          double threshold) {
  if (!model.trained()) throw ModelError("cannot augment with an untrained model");
  if (model.dim() != pipeline.dim()) {
    throw ModelError("model expects " + std::to_string(model.dim()) +
                     " inputs but the vocabulary yields " +
                     std::to_string(pipeline.dim()));
  }
  const SparseVector row = pipeline.Row(record, bundle);
  AugmentedMeme out;
  out.id = record.id;
  out.text = record.text;
  out.caption = bundle.caption;
  out.score = model.PredictProba(row);
  out.threshold = threshold;
  out.predicted_label = out.score >= threshold ? 1 : 0;
  out.engineered = BuildEngineered(record, bundle, pipeline.lexicons());
  if (top_k > 0) {
    const Attribution attribution = AttributePrediction(model, row, top_k);
    for (const auto &c : attribution.contributions) {
      out.top_features.push_back(
          {c.name, ChannelFor(c.index, c.name), c.contribution});
    }
  }
  return out;
}

nlohmann::json ToJson(const AugmentedMeme &meme) {
  nlohmann::json features = nlohmann::json::array();
  for (const auto &f : meme.top_features) {
    features.push_back({{"name", f.name},
                        {"channel", ChannelName(f.channel)},
                        {"contribution", f.contribution}});
  }
  nlohmann::json engineered = nlohmann::json::object();
  for (size_t i = 0; i < kEngineeredDim; ++i) {
    engineered[std::string(EngineeredNames()[i])] = meme.engineered[i];
  }
  return {{"id", meme.id},
          {"text", meme.text},
          {"caption", meme.caption},
          {"score", meme.score},
          {"predicted_label", meme.predicted_label},
          {"threshold", meme.threshold},
          {"top_features", features},
          {"engineered", engineered}};
}

}  // namespace memelens
