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

#include <gtest/gtest.h>

#include <cmath>

#include "memelens/errors.h"
#include "test_util.h"

namespace memelens {
namespace {

using testing::MakeBundle;
using testing::MakeRecord;

const char *const kDogwhistles[] = {"dishwasher", "sandwich", "kitchen", "oven",
                                    "shower",     "gas",      "thug",    "ape",
                                    "banana",     "cotton"};

struct Trained {
  Corpus corpus;
  std::unique_ptr<FeaturePipeline> pipeline;
  GbdtModel model;
};

// Fits the pipeline and a small booster on every record of `corpus`.
Trained Train(Corpus corpus) {
  Trained t;
  t.corpus = std::move(corpus);
  std::vector<const MemeRecord *> records;
  for (const auto &r : t.corpus.records()) records.push_back(&r);
  LexiconSet lex = LoadLexicons(MEMELENS_TEST_LEXICONS);
  Vocabulary vocab = FeaturePipeline::FitVocabulary(t.corpus, records, {});
  t.pipeline = std::make_unique<FeaturePipeline>(std::move(lex), std::move(vocab));
  std::vector<SparseVector> rows;
  std::vector<int> labels;
  for (const MemeRecord *r : records) {
    rows.push_back(t.pipeline->Row(*r, *t.corpus.Annotation(r->id)));
    labels.push_back(*r->label);
  }
  GbdtParams p;
  p.n_estimators = 5;
  p.max_depth = 3;
  t.model = TrainGbdt(rows, labels, p, t.pipeline->feature_names());
  return t;
}

// Positives differ from negatives only by a dogwhistle word. Each word is
// used once, so min_df keeps it out of the vocabulary and the tf-idf block
// is identical for every meme.
Corpus HateWordCorpus() {
  std::vector<MemeRecord> records;
  std::map<std::string, AnnotationBundle> ann;
  for (int i = 0; i < 30; ++i) {
    const std::string id = "h" + std::to_string(100 + i);
    const bool pos = i % 3 == 0;
    std::string text = "look at this";
    if (pos) text += std::string(" ") + kDogwhistles[i / 3];
    records.push_back(MakeRecord(id, text, pos ? 1 : 0));
    ann.emplace(id, MakeBundle(id));
  }
  return Corpus(std::move(records), std::move(ann));
}

// Two benign entities share the negatives so every ent_* token has the same
// document frequency and the text terms weigh the same in every meme.
Corpus EntityCorpus() {
  std::vector<MemeRecord> records;
  std::map<std::string, AnnotationBundle> ann;
  for (int i = 0; i < 30; ++i) {
    const std::string id = "e" + std::to_string(100 + i);
    const bool pos = i % 3 == 0;
    records.push_back(MakeRecord(id, "look at this man", pos ? 1 : 0));
    NamedEntity ent = pos          ? NamedEntity{"Hitler", "PERSON"}
                      : i % 3 == 1 ? NamedEntity{"Paris", "GPE"}
                                   : NamedEntity{"London", "GPE"};
    ann.emplace(id, MakeBundle(id, {}, {ent}));
  }
  return Corpus(std::move(records), std::move(ann));
}

TEST(ChannelFor, LayoutExamples) {
  EXPECT_EQ(ChannelFor(0, "emotion_happy"), FeatureChannel::kEngineered);
  EXPECT_EQ(ChannelFor(12, "hate_word_count"), FeatureChannel::kEngineered);
  EXPECT_EQ(ChannelFor(13, "ent_hitler_person"), FeatureChannel::kNamedEntity);
  EXPECT_EQ(ChannelFor(14, "oven"), FeatureChannel::kTextTerm);
  EXPECT_EQ(ChannelName(FeatureChannel::kEngineered), "engineered");
  EXPECT_EQ(ChannelName(FeatureChannel::kTextTerm), "text-term");
  EXPECT_EQ(ChannelName(FeatureChannel::kNamedEntity), "named-entity");
}

TEST(ChannelFor, PropertyOverRandomVocabularies) {
  Rng rng(5);
  const std::string alphabet = "abcdefghijklmnopqrstuvwxyz_";
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::vector<std::string>> docs(1);
    const size_t n = 1 + rng.Below(30);
    for (size_t i = 0; i < n; ++i) {
      std::string term = rng.Below(3) == 0 ? "ent_" : "";
      const size_t len = 1 + rng.Below(8);
      for (size_t c = 0; c < len; ++c) term += alphabet[rng.Below(alphabet.size())];
      docs[0].push_back(term);
    }
    const Vocabulary vocab = Vocabulary::Fit(docs, 1);
    const auto names = InputFeatureNames(vocab);
    for (uint32_t i = 0; i < names.size(); ++i) {
      FeatureChannel want = FeatureChannel::kTextTerm;
      if (i < kEngineeredDim) {
        want = FeatureChannel::kEngineered;
      } else if (names[i].rfind("ent_", 0) == 0) {
        want = FeatureChannel::kNamedEntity;
      }
      ASSERT_EQ(ChannelFor(i, names[i]), want) << names[i];
    }
  }
}

TEST(AugmentMeme, HateWordSignalSurfacesAsEngineeredFeature) {
  const Trained t = Train(HateWordCorpus());
  const MemeRecord &r = *t.corpus.Find("h100");
  const AugmentedMeme m =
      AugmentMeme(r, *t.corpus.Annotation(r.id), t.model, *t.pipeline);
  ASSERT_FALSE(m.top_features.empty());
  EXPECT_EQ(m.top_features[0].name, "hate_word_count");
  EXPECT_EQ(m.top_features[0].channel, FeatureChannel::kEngineered);
  EXPECT_GT(m.top_features[0].contribution, 0.0);
  EXPECT_EQ(m.predicted_label, 1);
  EXPECT_EQ(m.engineered[kHateWordCount], 1.0);
}

TEST(AugmentMeme, HatefulEntitySurfacesAsNamedEntity) {
  const Trained t = Train(EntityCorpus());
  const MemeRecord &r = *t.corpus.Find("e103");
  const AugmentedMeme m =
      AugmentMeme(r, *t.corpus.Annotation(r.id), t.model, *t.pipeline);
  bool found = false;
  for (const auto &f : m.top_features) {
    if (f.name == "ent_hitler_person") {
      found = true;
      EXPECT_EQ(f.channel, FeatureChannel::kNamedEntity);
    }
  }
  EXPECT_TRUE(found);
  EXPECT_EQ(m.predicted_label, 1);
}

TEST(AugmentMeme, TopKZeroKeepsScore) {
  const Trained t = Train(HateWordCorpus());
  const MemeRecord &r = *t.corpus.Find("h100");
  const AnnotationBundle &b = *t.corpus.Annotation(r.id);
  const AugmentedMeme m = AugmentMeme(r, b, t.model, *t.pipeline, 0);
  EXPECT_TRUE(m.top_features.empty());
  EXPECT_EQ(m.score, t.model.PredictProba(t.pipeline->Row(r, b)));
  EXPECT_GT(m.score, 0.0);
  EXPECT_LT(m.score, 1.0);
}

TEST(AugmentMeme, BoundedSortedAndScoreMatchesModel) {
  const Trained t = Train(HateWordCorpus());
  for (const auto &r : t.corpus.records()) {
    const AnnotationBundle &b = *t.corpus.Annotation(r.id);
    for (size_t k : {size_t{1}, size_t{2}, size_t{8}}) {
      const AugmentedMeme m = AugmentMeme(r, b, t.model, *t.pipeline, k);
      ASSERT_LE(m.top_features.size(), k);
      for (size_t i = 1; i < m.top_features.size(); ++i) {
        ASSERT_GE(std::abs(m.top_features[i - 1].contribution),
                  std::abs(m.top_features[i].contribution));
      }
      ASSERT_EQ(m.score, t.model.PredictProba(t.pipeline->Row(r, b)));
      ASSERT_EQ(m.predicted_label, m.score >= 0.5 ? 1 : 0);
    }
  }
}

TEST(AugmentMeme, Errors) {
  const Trained t = Train(HateWordCorpus());
  const MemeRecord &r = *t.corpus.Find("h100");
  const AnnotationBundle &b = *t.corpus.Annotation(r.id);
  EXPECT_THROW(AugmentMeme(r, b, GbdtModel{}, *t.pipeline), ModelError);

  GbdtModel narrow = t.model;
  narrow.feature_names.pop_back();
  EXPECT_THROW(AugmentMeme(r, b, narrow, *t.pipeline), ModelError);

  const AnnotationBundle other = MakeBundle("h101");
  EXPECT_THROW(AugmentMeme(r, other, t.model, *t.pipeline),
               std::invalid_argument);
}

TEST(AugmentMeme, JsonRecord) {
  const Trained t = Train(HateWordCorpus());
  const MemeRecord &r = *t.corpus.Find("h100");
  AnnotationBundle b = *t.corpus.Annotation(r.id);
  b.caption = "a kitchen";
  const nlohmann::json j =
      ToJson(AugmentMeme(r, b, t.model, *t.pipeline, 3, 0.25));
  EXPECT_EQ(j["id"], "h100");
  EXPECT_EQ(j["text"], r.text);
  EXPECT_EQ(j["caption"], "a kitchen");
  EXPECT_EQ(j["threshold"], 0.25);
  EXPECT_EQ(j["predicted_label"], 1);
  EXPECT_TRUE(j["score"].is_number_float());
  ASSERT_TRUE(j["top_features"].is_array());
  EXPECT_LE(j["top_features"].size(), 3u);
  EXPECT_EQ(j["top_features"][0]["name"], "hate_word_count");
  EXPECT_EQ(j["top_features"][0]["channel"], "engineered");
  EXPECT_EQ(j["engineered"].size(), kEngineeredDim);
  EXPECT_EQ(j["engineered"]["hate_word_count"], 1.0);
}

}  // namespace
}  // namespace memelens
