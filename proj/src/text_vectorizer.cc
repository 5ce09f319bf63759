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

#include "memelens/text_vectorizer.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "memelens/errors.h"
#include "memelens/numeric_io.h"

namespace memelens {
namespace {

constexpr const char *kVocabMagic = "memelens-vocabulary";
constexpr int kVocabVersion = 1;

void AppendTokens(std::string_view text, std::vector<std::string> &out) {
  auto tokens = TokenizeBasic(text);
  out.insert(out.end(), std::make_move_iterator(tokens.begin()),
             std::make_move_iterator(tokens.end()));
}

}  // namespace

double SparseVector::At(uint32_t index) const {
  auto it = std::lower_bound(
      entries.begin(), entries.end(), index,
      [](const SparseEntry &e, uint32_t i) { return e.index < i; });
  return (it != entries.end() && it->index == index) ? it->value : 0.0;
}

bool SparseVector::IsValid() const {
  for (size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].index >= dim) return false;
    if (i > 0 && entries[i].index <= entries[i - 1].index) return false;
    if (!std::isfinite(entries[i].value) || entries[i].value == 0.0) {
      return false;
    }
  }
  return true;
}

std::string EntityToken(const NamedEntity &entity) {
  std::string surface;
  bool in_space = false;
  for (char c : LowercaseUtf8(entity.surface)) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      in_space = true;
      continue;
    }
    if (in_space && !surface.empty()) surface.push_back('_');
    in_space = false;
    surface.push_back(c);
  }
  return "ent_" + surface + "_" + LowercaseUtf8(entity.category);
}

std::vector<std::string> ComposeJointText(const MemeRecord &record,
                                          const AnnotationBundle &bundle) {
  std::vector<std::string> tokens;
  AppendTokens(record.text, tokens);
  AppendTokens(bundle.caption, tokens);
  for (const auto &o : bundle.objects) AppendTokens(o, tokens);
  for (const auto &w : bundle.web_entities) AppendTokens(w, tokens);
  for (const auto &e : bundle.named_entities) {
    tokens.push_back(EntityToken(e));
  }
  return tokens;
}

void Vocabulary::Reindex() {
  index_.clear();
  index_.reserve(terms_.size());
  for (uint32_t i = 0; i < terms_.size(); ++i) index_.emplace(terms_[i], i);
}

Vocabulary Vocabulary::Fit(std::span<const std::vector<std::string>> documents,
                           size_t min_df, std::optional<size_t> max_features) {
  if (documents.empty()) {
    throw std::invalid_argument("cannot fit a vocabulary on zero documents");
  }
  std::map<std::string, uint32_t> df;
  for (const auto &doc : documents) {
    std::set<std::string_view> seen(doc.begin(), doc.end());
    for (auto term : seen) ++df[std::string(term)];
  }
  std::vector<std::pair<std::string, uint32_t>> kept;
  for (auto &[term, count] : df) {
    if (count >= min_df) kept.emplace_back(term, count);
  }
  if (max_features && kept.size() > *max_features) {
    std::stable_sort(kept.begin(), kept.end(),
                     [](const auto &a, const auto &b) {
                       return a.second > b.second;
                     });
    kept.resize(*max_features);
    std::sort(kept.begin(), kept.end());
  }
  Vocabulary vocab;
  vocab.document_count_ = documents.size();
  for (auto &[term, count] : kept) {
    vocab.terms_.push_back(term);
    vocab.df_.push_back(count);
  }
  vocab.Reindex();
  return vocab;
}

std::optional<uint32_t> Vocabulary::Find(const std::string &term) const {
  auto it = index_.find(term);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

double Vocabulary::Idf(uint32_t index) const {
  return std::log((1.0 + static_cast<double>(document_count_)) /
                  (1.0 + static_cast<double>(df_[index]))) +
         1.0;
}

void Vocabulary::Save(const std::filesystem::path &path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << kVocabMagic << '\t' << kVocabVersion << '\t' << document_count_
      << '\t' << terms_.size() << '\n';
  for (uint32_t i = 0; i < terms_.size(); ++i) {
    out << terms_[i] << '\t' << i << '\t' << df_[i] << '\n';
  }
}

Vocabulary Vocabulary::Load(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw ModelError("cannot open vocabulary " + path.string());
  std::string line;
  if (!std::getline(in, line)) {
    throw ModelError(path.string() + ": empty vocabulary file");
  }
  std::istringstream header(line);
  std::string magic;
  int version = 0;
  size_t n = 0;
  size_t v = 0;
  if (!(header >> magic >> version >> n >> v) || magic != kVocabMagic) {
    throw ModelError(path.string() + ": not a memelens vocabulary file");
  }
  if (version != kVocabVersion) {
    throw ModelError(path.string() + ": unsupported vocabulary version " +
                     std::to_string(version));
  }
  Vocabulary vocab;
  vocab.document_count_ = n;
  vocab.terms_.reserve(v);
  vocab.df_.reserve(v);
  for (size_t i = 0; i < v; ++i) {
    if (!std::getline(in, line)) {
      throw ModelError(path.string() + ": truncated vocabulary");
    }
    const auto t1 = line.find('\t');
    const auto t2 = line.find('\t', t1 == std::string::npos ? t1 : t1 + 1);
    if (t1 == std::string::npos || t2 == std::string::npos) {
      throw ModelError(path.string() + ": malformed vocabulary line " +
                       std::to_string(i + 2));
    }
    auto index = ParseInt(std::string_view(line).substr(t1 + 1, t2 - t1 - 1));
    auto df = ParseInt(std::string_view(line).substr(t2 + 1));
    if (!index || static_cast<size_t>(*index) != i || !df || *df < 1 ||
        static_cast<size_t>(*df) > n) {
      throw ModelError(path.string() + ": inconsistent vocabulary line " +
                       std::to_string(i + 2));
    }
    vocab.terms_.push_back(line.substr(0, t1));
    vocab.df_.push_back(static_cast<uint32_t>(*df));
  }
  vocab.Reindex();
  return vocab;
}

SparseVector TransformTfidf(std::span<const std::string> tokens,
                            const Vocabulary &vocab) {
  std::map<uint32_t, double> counts;
  for (const auto &t : tokens) {
    if (auto idx = vocab.Find(t)) counts[*idx] += 1.0;
  }
  SparseVector out;
  out.dim = vocab.size();
  double norm2 = 0.0;
  for (auto [idx, tf] : counts) {
    const double w = tf * vocab.Idf(idx);
    out.entries.push_back({idx, w});
    norm2 += w * w;
  }
  if (norm2 > 0.0) {
    const double norm = std::sqrt(norm2);
    for (auto &e : out.entries) e.value /= norm;
  }
  return out;
}

SparseVector AssembleInput(const EngineeredVector &engineered,
                           const SparseVector &tfidf) {
  SparseVector out;
  out.dim = kEngineeredDim + tfidf.dim;
  out.entries.reserve(kEngineeredDim + tfidf.entries.size());
  for (uint32_t i = 0; i < kEngineeredDim; ++i) {
    if (engineered[i] != 0.0) out.entries.push_back({i, engineered[i]});
  }
  for (const auto &e : tfidf.entries) {
    out.entries.push_back(
        {e.index + static_cast<uint32_t>(kEngineeredDim), e.value});
  }
  return out;
}

std::vector<std::string> InputFeatureNames(const Vocabulary &vocab) {
  std::vector<std::string> names;
  names.reserve(kEngineeredDim + vocab.size());
  for (auto n : EngineeredNames()) names.emplace_back(n);
  names.insert(names.end(), vocab.terms().begin(), vocab.terms().end());
  return names;
}

}  // namespace memelens
