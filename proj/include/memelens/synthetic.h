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

#ifndef MEMELENS_SYNTHETIC_H_
#define MEMELENS_SYNTHETIC_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "memelens/corpus.h"

namespace memelens {

// A labeled desk-scale corpus with planted signals. Each hateful meme
// carries exactly one planted cue: either dogwhistle terms from the bundled
// hate-word lexicon (surfacing as hate_word_count) or a named entity
// (surfacing as its ent_* token). Encoder embeddings are shifted by
// +embedding_shift for hateful memes and -embedding_shift otherwise.
struct SyntheticOptions {
  size_t count = 400;
  uint64_t seed = 1;
  double positive_rate = 0.37;
  size_t min_steps = 2;
  size_t max_steps = 5;
  double embedding_shift = 0.25;
  // Share of benign memes that mention a dogwhistle term innocently.
  double benign_hate_word_rate = 0.05;
  bool write_images = true;
};

struct SyntheticCorpus {
  std::vector<MemeRecord> memes;
  std::map<std::string, AnnotationBundle> annotations;
  // Hateful meme id -> the feature name its cue should surface as.
  std::map<std::string, std::string> planted;
};

SyntheticCorpus GenerateSynthetic(const SyntheticOptions &options);

// Writes memes.jsonl, annotations.jsonl, planted.tsv and (optionally) a
// placeholder image per meme under dir/img/.
void WriteSynthetic(const SyntheticCorpus &corpus,
                    const std::filesystem::path &dir, bool write_images);

std::map<std::string, std::string> ReadPlanted(
    const std::filesystem::path &path);

}  // namespace memelens

#endif  // MEMELENS_SYNTHETIC_H_
