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

#ifndef MEMELENS_LEXICON_FEATURES_H_
#define MEMELENS_LEXICON_FEATURES_H_

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "memelens/corpus.h"

namespace memelens {

using TermSet = std::unordered_set<std::string>;

struct SentimentEntry {
  double polarity = 0.0;      // [-1, 1]
  double subjectivity = 0.0;  // [0, 1]
};

// Ordered (happy, sad, fear, surprise, angry).
using EmotionWeights = std::array<double, 5>;

struct LexiconSet {
  TermSet profanity;
  TermSet slurs;
  TermSet hate_words;
  std::unordered_map<std::string, SentimentEntry> sentiment;
  std::unordered_map<std::string, EmotionWeights> emotion;

  // Throws ValidationError on non-normalized keys or out-of-range values.
  void Validate() const;
};

// Reads profanity.txt, slurs.txt, hate_words.txt, sentiment.tsv and
// emotion.tsv from `dir`. Lines starting with '#' are comments. Terms are
// lowercased on load.
LexiconSet LoadLexicons(const std::filesystem::path &dir);

// Splits on non-alphanumeric code points and lowercases. Invalid UTF-8 bytes
// act as separators.
std::vector<std::string> TokenizeBasic(std::string_view text);

// Lowercases with the same code point mapping TokenizeBasic uses.
std::string LowercaseUtf8(std::string_view text);

// Occurrences with multiplicity.
size_t CountLexiconHits(std::span<const std::string> tokens,
                        const TermSet &lexicon);

struct Sentiment {
  double polarity = 0.0;
  double subjectivity = 0.0;
};

// Mean polarity/subjectivity over tokens found in the lexicon. "not", "no"
// or "never" directly before a matched token flips that token's polarity.
Sentiment ScoreSentiment(std::span<const std::string> tokens,
                         const LexiconSet &lexicons);

// L1-normalized sum of matched emotion rows, or all zeros.
EmotionWeights ScoreEmotion(std::span<const std::string> tokens,
                            const LexiconSet &lexicons);

enum EngineeredIndex : size_t {
  kEmotionHappy = 0,
  kEmotionSad,
  kEmotionFear,
  kEmotionSurprise,
  kEmotionAngry,
  kSentimentPolarity,
  kSentimentSubjectivity,
  kNliContradiction,
  kNliNeutral,
  kNliEntailment,
  kProfanityCount,
  kSlurCount,
  kHateWordCount,
  kEngineeredDim,
};

using EngineeredVector = std::array<double, kEngineeredDim>;

// Names in layout order, e.g. "emotion_happy" ... "hate_word_count".
const std::array<std::string_view, kEngineeredDim> &EngineeredNames();

// Scores the meme text only; the NLI block is copied from the bundle.
// Throws std::invalid_argument if the ids differ.
EngineeredVector BuildEngineered(const MemeRecord &record,
                                 const AnnotationBundle &bundle,
                                 const LexiconSet &lexicons);

}  // namespace memelens

#endif  // MEMELENS_LEXICON_FEATURES_H_
