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

#include "memelens/lexicon_features.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "memelens/errors.h"
#include "memelens/numeric_io.h"

namespace memelens {
namespace {

constexpr char32_t kInvalid = 0xFFFFFFFF;

// Decodes one code point at `pos` and advances it. Returns kInvalid for a
// malformed sequence, consuming a single byte.
char32_t DecodeUtf8(std::string_view s, size_t &pos) {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  int len = 0;
  char32_t cp = 0;
  if (b0 < 0x80) {
    ++pos;
    return b0;
  } else if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    ++pos;
    return kInvalid;
  }
  if (pos + len > s.size()) {
    ++pos;
    return kInvalid;
  }
  for (int i = 1; i < len; ++i) {
    const auto b = static_cast<unsigned char>(s[pos + i]);
    if ((b & 0xC0) != 0x80) {
      ++pos;
      return kInvalid;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  static constexpr char32_t kMin[] = {0, 0, 0x80, 0x800, 0x10000};
  if (cp < kMin[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
    ++pos;
    return kInvalid;
  }
  pos += len;
  return cp;
}

void EncodeUtf8(char32_t cp, std::string &out) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

bool InRange(char32_t cp, char32_t lo, char32_t hi) {
  return cp >= lo && cp <= hi;
}

// Letters, digits and combining marks count as word characters. Outside
// ASCII this is a block-level approximation: punctuation, symbol, emoji and
// private-use blocks separate words, everything else joins them.
bool IsWordChar(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') ||
           (cp >= 'A' && cp <= 'Z');
  }
  if (cp == kInvalid) return false;
  if (cp < 0xC0) return cp == 0xAA || cp == 0xB5 || cp == 0xBA;
  if (cp == 0xD7 || cp == 0xF7) return false;
  if (InRange(cp, 0x2000, 0x206F)) return false;
  if (InRange(cp, 0x20A0, 0x2BFF)) return false;
  if (InRange(cp, 0x2E00, 0x2E7F)) return false;
  if (InRange(cp, 0x3000, 0x303F)) return false;
  if (InRange(cp, 0xE000, 0xF8FF)) return false;
  if (InRange(cp, 0xFE00, 0xFE0F)) return false;
  if (InRange(cp, 0xFE30, 0xFE4F)) return false;
  if (InRange(cp, 0xFF00, 0xFF0F) || InRange(cp, 0xFF1A, 0xFF20) ||
      InRange(cp, 0xFF3B, 0xFF40) || InRange(cp, 0xFF5B, 0xFF65)) {
    return false;
  }
  if (cp == 0xFEFF || InRange(cp, 0xFFF0, 0xFFFF)) return false;
  if (InRange(cp, 0x1F000, 0x1FAFF)) return false;
  if (InRange(cp, 0xE0000, 0xE007F)) return false;
  return true;
}

char32_t ToLower(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
  if (cp < 0xC0) return cp;
  if (InRange(cp, 0xC0, 0xDE) && cp != 0xD7) return cp + 0x20;
  if (InRange(cp, 0x100, 0x137) || InRange(cp, 0x14A, 0x177)) {
    return cp | 1;
  }
  if (InRange(cp, 0x139, 0x148) || InRange(cp, 0x179, 0x17E)) {
    return (cp & 1) ? cp + 1 : cp;
  }
  if (cp == 0x178) return 0xFF;
  if (InRange(cp, 0x391, 0x3A9) && cp != 0x3A2) return cp + 0x20;
  if (InRange(cp, 0x400, 0x40F)) return cp + 0x50;
  if (InRange(cp, 0x410, 0x42F)) return cp + 0x20;
  if (InRange(cp, 0xFF21, 0xFF3A)) return cp + 0x20;
  return cp;
}

std::string Trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

// Yields the trimmed, non-comment lines of a lexicon file with line numbers.
template <typename Fn>
void ForEachEntry(const std::filesystem::path &path, Fn &&fn) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open lexicon " + path.string());
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = Trim(line);
    if (t.empty() || t[0] == '#') continue;
    fn(t, line_no);
  }
}

TermSet LoadTermSet(const std::filesystem::path &path) {
  TermSet terms;
  ForEachEntry(path, [&](const std::string &t, size_t) {
    terms.insert(LowercaseUtf8(t));
  });
  return terms;
}

std::vector<std::string> SplitTabs(const std::string &line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, '\t')) fields.push_back(Trim(f));
  return fields;
}

double RequireNumber(const std::string &field, const std::filesystem::path &p,
                     size_t line) {
  auto v = ParseDouble(field);
  if (!v || !std::isfinite(*v)) {
    throw ParseError(p.string(), line, "bad number '" + field + "'");
  }
  return *v;
}

bool IsNormalizedKey(const std::string &key) {
  return !key.empty() && Trim(key) == key && LowercaseUtf8(key) == key;
}

}  // namespace

std::string LowercaseUtf8(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  size_t pos = 0;
  while (pos < text.size()) {
    const size_t start = pos;
    const char32_t cp = DecodeUtf8(text, pos);
    if (cp == kInvalid) {
      out.append(text.substr(start, pos - start));
    } else {
      EncodeUtf8(ToLower(cp), out);
    }
  }
  return out;
}

std::vector<std::string> TokenizeBasic(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  size_t pos = 0;
  while (pos < text.size()) {
    const char32_t cp = DecodeUtf8(text, pos);
    if (IsWordChar(cp)) {
      EncodeUtf8(ToLower(cp), current);
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

void LexiconSet::Validate() const {
  for (const TermSet *set : {&profanity, &slurs, &hate_words}) {
    for (const auto &t : *set) {
      if (!IsNormalizedKey(t)) {
        throw ValidationError("lexicon term '" + t + "' is not normalized");
      }
    }
  }
  for (const auto &[t, e] : sentiment) {
    if (!IsNormalizedKey(t)) {
      throw ValidationError("sentiment term '" + t + "' is not normalized");
    }
    if (!(e.polarity >= -1.0 && e.polarity <= 1.0) ||
        !(e.subjectivity >= 0.0 && e.subjectivity <= 1.0)) {
      throw ValidationError("sentiment entry for '" + t + "' out of range");
    }
  }
  for (const auto &[t, w] : emotion) {
    if (!IsNormalizedKey(t)) {
      throw ValidationError("emotion term '" + t + "' is not normalized");
    }
    for (double x : w) {
      if (!(x >= 0.0) || !std::isfinite(x)) {
        throw ValidationError("emotion weight for '" + t + "' is negative");
      }
    }
  }
}

LexiconSet LoadLexicons(const std::filesystem::path &dir) {
  LexiconSet lex;
  lex.profanity = LoadTermSet(dir / "profanity.txt");
  lex.slurs = LoadTermSet(dir / "slurs.txt");
  lex.hate_words = LoadTermSet(dir / "hate_words.txt");

  const auto sentiment_path = dir / "sentiment.tsv";
  ForEachEntry(sentiment_path, [&](const std::string &line, size_t line_no) {
    auto f = SplitTabs(line);
    if (f.size() != 3) {
      throw ParseError(sentiment_path.string(), line_no,
                       "expected term<TAB>polarity<TAB>subjectivity");
    }
    lex.sentiment[LowercaseUtf8(f[0])] = {
        RequireNumber(f[1], sentiment_path, line_no),
        RequireNumber(f[2], sentiment_path, line_no)};
  });

  const auto emotion_path = dir / "emotion.tsv";
  ForEachEntry(emotion_path, [&](const std::string &line, size_t line_no) {
    auto f = SplitTabs(line);
    if (f.size() != 6) {
      throw ParseError(emotion_path.string(), line_no,
                       "expected term and five emotion weights");
    }
    EmotionWeights w;
    for (size_t i = 0; i < 5; ++i) {
      w[i] = RequireNumber(f[i + 1], emotion_path, line_no);
    }
    lex.emotion[LowercaseUtf8(f[0])] = w;
  });

  lex.Validate();
  return lex;
}

size_t CountLexiconHits(std::span<const std::string> tokens,
                        const TermSet &lexicon) {
  return static_cast<size_t>(
      std::count_if(tokens.begin(), tokens.end(),
                    [&](const std::string &t) { return lexicon.contains(t); }));
}

Sentiment ScoreSentiment(std::span<const std::string> tokens,
                         const LexiconSet &lexicons) {
  double polarity = 0.0;
  double subjectivity = 0.0;
  size_t hits = 0;
  for (size_t i = 0; i < tokens.size(); ++i) {
    auto it = lexicons.sentiment.find(tokens[i]);
    if (it == lexicons.sentiment.end()) continue;
    double p = it->second.polarity;
    if (i > 0 && (tokens[i - 1] == "not" || tokens[i - 1] == "no" ||
                  tokens[i - 1] == "never")) {
      p = -p;
    }
    polarity += p;
    subjectivity += it->second.subjectivity;
    ++hits;
  }
  if (hits == 0) return {};
  return {polarity / static_cast<double>(hits),
          subjectivity / static_cast<double>(hits)};
}

EmotionWeights ScoreEmotion(std::span<const std::string> tokens,
                            const LexiconSet &lexicons) {
  EmotionWeights sum{};
  for (const auto &t : tokens) {
    auto it = lexicons.emotion.find(t);
    if (it == lexicons.emotion.end()) continue;
    for (size_t k = 0; k < sum.size(); ++k) sum[k] += it->second[k];
  }
  double total = 0.0;
  for (double x : sum) total += x;
  if (total <= 0.0) return EmotionWeights{};
  for (double &x : sum) x /= total;
  return sum;
}

const std::array<std::string_view, kEngineeredDim> &EngineeredNames() {
  static constexpr std::array<std::string_view, kEngineeredDim> kNames = {
      "emotion_happy",          "emotion_sad",       "emotion_fear",
      "emotion_surprise",       "emotion_angry",     "sentiment_polarity",
      "sentiment_subjectivity", "nli_contradiction", "nli_neutral",
      "nli_entailment",         "profanity_count",   "slur_count",
      "hate_word_count"};
  return kNames;
}

EngineeredVector BuildEngineered(const MemeRecord &record,
                                 const AnnotationBundle &bundle,
                                 const LexiconSet &lexicons) {
  if (record.id != bundle.id) {
    throw std::invalid_argument("meme id '" + record.id +
                                "' does not match annotation id '" +
                                bundle.id + "'");
  }
  const auto tokens = TokenizeBasic(record.text);
  EngineeredVector v{};
  const EmotionWeights emotion = ScoreEmotion(tokens, lexicons);
  std::copy(emotion.begin(), emotion.end(), v.begin() + kEmotionHappy);
  const Sentiment s = ScoreSentiment(tokens, lexicons);
  v[kSentimentPolarity] = s.polarity;
  v[kSentimentSubjectivity] = s.subjectivity;
  v[kNliContradiction] = bundle.nli.contradiction;
  v[kNliNeutral] = bundle.nli.neutral;
  v[kNliEntailment] = bundle.nli.entailment;
  v[kProfanityCount] =
      static_cast<double>(CountLexiconHits(tokens, lexicons.profanity));
  v[kSlurCount] = static_cast<double>(CountLexiconHits(tokens, lexicons.slurs));
  v[kHateWordCount] =
      static_cast<double>(CountLexiconHits(tokens, lexicons.hate_words));
  return v;
}

}  // namespace memelens
