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

#include "memelens/corpus.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>

#include "json.hpp"
#include "memelens/errors.h"
#include "memelens/random.h"

namespace memelens {

using json = nlohmann::json;

std::string_view SplitName(Split split) {
  switch (split) {
    case Split::kUnassigned:
      return "unassigned";
    case Split::kTrain:
      return "train";
    case Split::kValidation:
      return "validation";
    case Split::kTest:
      return "test";
  }
  return "unassigned";
}

std::optional<Split> ParseSplit(std::string_view name) {
  for (Split s : {Split::kUnassigned, Split::kTrain, Split::kValidation,
                  Split::kTest}) {
    if (SplitName(s) == name) return s;
  }
  return std::nullopt;
}

EmbeddingSequence::EmbeddingSequence(size_t width, std::vector<double> values)
    : width_(width), values_(std::move(values)) {
  if (width_ == 0 || values_.size() % width_ != 0) {
    throw ValidationError("embedding of " + std::to_string(values_.size()) +
                          " values is not a multiple of width " +
                          std::to_string(width_));
  }
}

void ValidateAnnotation(const AnnotationBundle &bundle) {
  const std::string where = "annotation '" + bundle.id + "': ";
  if (bundle.id.empty()) throw ValidationError("annotation with empty id");
  const double nli[] = {bundle.nli.contradiction, bundle.nli.neutral,
                        bundle.nli.entailment};
  double sum = 0.0;
  for (double p : nli) {
    if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
      throw ValidationError(where + "nli component outside [0,1]");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-6) {
    throw ValidationError(where + "nli probabilities sum to " +
                          std::to_string(sum) + ", expected 1");
  }
  if (bundle.embedding_seq.empty()) {
    throw ValidationError(where + "embedding_seq is empty");
  }
  if (bundle.embedding_seq.width() != kEmbeddingWidth) {
    throw ValidationError(where + "embedding width " +
                          std::to_string(bundle.embedding_seq.width()) +
                          ", expected " + std::to_string(kEmbeddingWidth));
  }
  for (double v : bundle.embedding_seq.values()) {
    if (!std::isfinite(v)) {
      throw ValidationError(where + "non-finite embedding component");
    }
  }
  for (const auto &ent : bundle.named_entities) {
    const bool ok =
        !ent.category.empty() &&
        std::all_of(ent.category.begin(), ent.category.end(), [](char c) {
          return std::isupper(static_cast<unsigned char>(c)) ||
                 std::isdigit(static_cast<unsigned char>(c)) || c == '_';
        });
    if (!ok) {
      throw ValidationError(where + "named-entity category '" + ent.category +
                            "' is not an uppercase tag");
    }
  }
}

Corpus::Corpus(std::vector<MemeRecord> records,
               std::map<std::string, AnnotationBundle> annotations,
               uint64_t split_seed)
    : records_(std::move(records)),
      annotations_(std::move(annotations)),
      split_seed_(split_seed) {
  for (size_t i = 0; i < records_.size(); ++i) {
    const MemeRecord &r = records_[i];
    if (r.id.empty()) throw ValidationError("meme record with empty id");
    if (r.label && *r.label != 0 && *r.label != 1) {
      throw ValidationError("meme '" + r.id + "': label must be 0 or 1");
    }
    if (!index_.emplace(r.id, i).second) {
      throw ValidationError("duplicate meme id '" + r.id + "'");
    }
  }
  for (const auto &[id, bundle] : annotations_) {
    if (id != bundle.id) {
      throw ValidationError("annotation keyed '" + id + "' carries id '" +
                            bundle.id + "'");
    }
    ValidateAnnotation(bundle);
  }
}

const MemeRecord *Corpus::Find(std::string_view id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &records_[it->second];
}

const AnnotationBundle *Corpus::Annotation(std::string_view id) const {
  auto it = annotations_.find(std::string(id));
  return it == annotations_.end() ? nullptr : &it->second;
}

std::vector<const MemeRecord *> Corpus::InSplit(Split split) const {
  std::vector<const MemeRecord *> out;
  for (const auto &r : records_) {
    if (r.split == split && Usable(r.id)) out.push_back(&r);
  }
  return out;
}

std::vector<const MemeRecord *> Corpus::Labeled() const {
  std::vector<const MemeRecord *> out;
  for (const auto &r : records_) {
    if (r.label && Usable(r.id)) out.push_back(&r);
  }
  return out;
}

namespace {

template <typename Fn>
void ForEachLine(const std::filesystem::path &path, Fn &&fn) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error &e) {
      throw ParseError(path.string(), line_no, "malformed JSON");
    }
    if (!obj.is_object()) {
      throw ParseError(path.string(), line_no, "expected a JSON object");
    }
    try {
      fn(obj, line_no);
    } catch (const json::exception &e) {
      throw ParseError(path.string(), line_no, e.what());
    }
  }
}

std::string RequireString(const json &obj, const char *key,
                          const std::string &path, size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw ParseError(path, line, std::string("missing string field '") + key +
                                     "'");
  }
  return it->get<std::string>();
}

std::vector<std::string> StringList(const json &obj, const char *key) {
  std::vector<std::string> out;
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return out;
  for (const auto &v : *it) out.push_back(v.get<std::string>());
  return out;
}

}  // namespace

std::vector<MemeRecord> ReadMemes(const std::filesystem::path &path) {
  std::vector<MemeRecord> records;
  const std::string p = path.string();
  ForEachLine(path, [&](const json &obj, size_t line) {
    MemeRecord r;
    auto id = obj.find("id");
    if (id == obj.end()) throw ParseError(p, line, "missing field 'id'");
    // The public dataset stores numeric-looking ids as strings, but some
    // copies carry them as integers.
    r.id = id->is_string() ? id->get<std::string>() : id->dump();
    r.img = obj.value("img", std::string());
    r.text = RequireString(obj, "text", p, line);
    if (auto lbl = obj.find("label"); lbl != obj.end() && !lbl->is_null()) {
      if (!lbl->is_number_integer()) {
        throw ParseError(p, line, "label must be 0 or 1");
      }
      r.label = lbl->get<int>();
    }
    records.push_back(std::move(r));
  });
  return records;
}

std::map<std::string, AnnotationBundle> ReadAnnotations(
    const std::filesystem::path &path) {
  std::map<std::string, AnnotationBundle> bundles;
  const std::string p = path.string();
  ForEachLine(path, [&](const json &obj, size_t line) {
    AnnotationBundle b;
    auto id = obj.find("id");
    if (id == obj.end()) throw ParseError(p, line, "missing field 'id'");
    b.id = id->is_string() ? id->get<std::string>() : id->dump();
    b.caption = obj.value("caption", std::string());
    b.objects = StringList(obj, "objects");
    b.web_entities = StringList(obj, "web_entities");
    if (auto ents = obj.find("named_entities"); ents != obj.end()) {
      for (const auto &e : *ents) {
        b.named_entities.push_back(
            {e.at("text").get<std::string>(), e.at("label").get<std::string>()});
      }
    }
    const json &nli = obj.at("nli");
    b.nli = {nli.at("contradiction").get<double>(),
             nli.at("neutral").get<double>(),
             nli.at("entailment").get<double>()};
    std::vector<double> flat;
    size_t width = 0;
    const json &seq = obj.at("embedding_seq");
    if (!seq.empty() && seq.front().is_number()) {
      // A pooled vector: one step.
      for (const auto &v : seq) flat.push_back(v.get<double>());
      width = flat.size();
    }
    for (const auto &row : width > 0 ? json::array() : seq) {
      if (width == 0) width = row.size();
      if (row.size() != width || width == 0) {
        throw ParseError(p, line, "ragged embedding_seq");
      }
      for (const auto &v : row) flat.push_back(v.get<double>());
    }
    if (width == 0) throw ParseError(p, line, "embedding_seq is empty");
    b.embedding_seq = EmbeddingSequence(width, std::move(flat));
    try {
      ValidateAnnotation(b);
    } catch (const ValidationError &e) {
      throw ValidationError(p + ":" + std::to_string(line) + ": " + e.what());
    }
    const std::string key = b.id;
    if (!bundles.emplace(key, std::move(b)).second) {
      throw ValidationError("duplicate annotation id '" + key + "'");
    }
  });
  return bundles;
}

Corpus LoadCorpus(const std::filesystem::path &memes_path,
                  const std::filesystem::path &annotations_path) {
  for (const auto &p : {memes_path, annotations_path}) {
    if (!std::filesystem::exists(p)) {
      throw DataError("no such file: " + p.string());
    }
  }
  return Corpus(ReadMemes(memes_path), ReadAnnotations(annotations_path));
}

void WriteMemes(const std::filesystem::path &path,
                std::span<const MemeRecord> records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto &r : records) {
    json obj = {{"id", r.id}, {"img", r.img}, {"text", r.text}};
    if (r.label) obj["label"] = *r.label;
    out << obj.dump() << '\n';
  }
}

void WriteAnnotations(const std::filesystem::path &path,
                      const std::map<std::string, AnnotationBundle> &bundles) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto &[id, b] : bundles) {
    json ents = json::array();
    for (const auto &e : b.named_entities) {
      ents.push_back({{"text", e.surface}, {"label", e.category}});
    }
    json seq = json::array();
    for (size_t t = 0; t < b.embedding_seq.steps(); ++t) {
      auto row = b.embedding_seq.step(t);
      seq.push_back(json(std::vector<double>(row.begin(), row.end())));
    }
    json obj = {{"id", b.id},
                {"caption", b.caption},
                {"objects", b.objects},
                {"web_entities", b.web_entities},
                {"named_entities", ents},
                {"nli",
                 {{"contradiction", b.nli.contradiction},
                  {"neutral", b.nli.neutral},
                  {"entailment", b.nli.entailment}}},
                {"embedding_seq", seq}};
    out << obj.dump() << '\n';
  }
}

namespace {

// Labeled ids per class, sorted so the result does not depend on file order.
std::array<std::vector<std::string>, 2> LabeledIdsByClass(
    const Corpus &corpus, bool exclude_test, bool require_usable) {
  std::array<std::vector<std::string>, 2> by_class;
  for (const auto &r : corpus.records()) {
    if (!r.label) continue;
    if (exclude_test && r.split == Split::kTest) continue;
    if (require_usable && !corpus.Usable(r.id)) continue;
    by_class[*r.label].push_back(r.id);
  }
  for (auto &ids : by_class) std::sort(ids.begin(), ids.end());
  return by_class;
}

size_t RoundedShare(size_t total, size_t part, size_t whole) {
  if (whole == 0) return 0;
  return static_cast<size_t>(std::llround(static_cast<double>(total) *
                                          static_cast<double>(part) /
                                          static_cast<double>(whole)));
}

}  // namespace

Corpus AssignSplits(const Corpus &corpus, uint64_t seed) {
  auto by_class = LabeledIdsByClass(corpus, false, false);
  const size_t n = by_class[0].size() + by_class[1].size();
  if (n < 10) {
    throw InsufficientDataError("need at least 10 labeled records to split, "
                                "found " + std::to_string(n));
  }
  const size_t n_test = (n + 5) / 10;
  const size_t n_val = (n + 5) / 10;
  const size_t pos_test = std::min(RoundedShare(n_test, by_class[1].size(), n),
                                   by_class[1].size());
  const size_t pos_val =
      std::min(RoundedShare(n_val, by_class[1].size(), n),
               by_class[1].size() - pos_test);
  const size_t quota_test[2] = {n_test - pos_test, pos_test};
  const size_t quota_val[2] = {n_val - pos_val, pos_val};

  Rng rng(seed);
  std::map<std::string, Split> assignment;
  for (int c = 0; c < 2; ++c) {
    auto &ids = by_class[c];
    rng.Shuffle(std::span<std::string>(ids));
    for (size_t i = 0; i < ids.size(); ++i) {
      Split s = Split::kTrain;
      if (i < quota_test[c]) {
        s = Split::kTest;
      } else if (i < quota_test[c] + quota_val[c]) {
        s = Split::kValidation;
      }
      assignment[ids[i]] = s;
    }
  }

  std::vector<MemeRecord> records(corpus.records().begin(),
                                  corpus.records().end());
  for (auto &r : records) {
    auto it = assignment.find(r.id);
    r.split = it == assignment.end() ? Split::kUnassigned : it->second;
  }
  return Corpus(std::move(records), corpus.annotations(), seed);
}

std::vector<Fold> MakeFolds(const Corpus &corpus, int k, uint64_t seed) {
  if (k < 2) throw std::invalid_argument("k-fold needs k >= 2");
  auto by_class = LabeledIdsByClass(corpus, true, true);
  const size_t n = by_class[0].size() + by_class[1].size();
  if (static_cast<size_t>(k) > n) {
    throw InsufficientDataError(std::to_string(k) + " folds requested but only " +
                                std::to_string(n) + " records participate");
  }
  Rng rng(seed);
  std::vector<std::vector<std::string>> holdouts(k);
  size_t next = 0;
  for (auto &ids : by_class) {
    rng.Shuffle(std::span<std::string>(ids));
    for (const auto &id : ids) holdouts[next++ % k].push_back(id);
  }
  std::vector<Fold> folds(k);
  for (int f = 0; f < k; ++f) {
    std::sort(holdouts[f].begin(), holdouts[f].end());
    folds[f].holdout_ids = holdouts[f];
    for (int g = 0; g < k; ++g) {
      if (g == f) continue;
      folds[f].train_ids.insert(folds[f].train_ids.end(), holdouts[g].begin(),
                                holdouts[g].end());
    }
    std::sort(folds[f].train_ids.begin(), folds[f].train_ids.end());
  }
  return folds;
}

}  // namespace memelens
