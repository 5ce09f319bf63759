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

#include "memelens/synthetic.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>

#include "memelens/errors.h"
#include "memelens/random.h"
#include "memelens/text_vectorizer.h"

namespace memelens {
namespace {

// Must stay in sync with data/lexicons/hate_words.txt.
constexpr std::array<const char *, 5> kDogwhistles = {
    "dishwasher", "sandwich", "kitchen", "oven", "shower"};

const std::array<NamedEntity, 2> kHatefulEntities = {
    NamedEntity{"hitler", "PERSON"}, NamedEntity{"isis", "ORG"}};
const std::array<NamedEntity, 4> kBenignEntities = {
    NamedEntity{"paris", "GPE"}, NamedEntity{"monday", "DATE"},
    NamedEntity{"nasa", "ORG"}, NamedEntity{"taylor swift", "PERSON"}};

constexpr std::array<const char *, 12> kSubjects = {
    "my friend", "the teacher", "my cat",   "this guy",  "grandma",
    "the boss",  "everyone",    "my dog",   "the coach", "my brother",
    "the neighbors", "my sister"};
constexpr std::array<const char *, 10> kVerbs = {
    "loves", "made", "found", "wants", "forgot",
    "cleaned", "watched", "bought", "shared", "fixed"};
constexpr std::array<const char *, 12> kObjects = {
    "the car",   "a pizza",  "the club",   "a movie",   "the garden",
    "a puppy",   "the game", "a sweater",  "the beach", "some coffee",
    "the bike",  "a book"};
constexpr std::array<const char *, 10> kMoods = {
    "great", "happy", "sad", "funny", "terrible",
    "amazing", "boring", "scary", "angry", "nice"};
constexpr std::array<const char *, 10> kCaptionObjects = {
    "person", "dog", "car", "tree", "table",
    "building", "beach", "street", "cat", "group of people"};
constexpr std::array<const char *, 6> kWebEntities = {
    "meme", "internet meme", "stock photography", "image", "photograph",
    "humour"};

template <size_t N>
const char *Pick(Rng &rng, const std::array<const char *, N> &items) {
  return items[rng.Below(N)];
}

// Everyday sentence; a dogwhistle, when given, takes the object slot so the
// text keeps the same shape and length as the benign sentences.
std::string Sentence(Rng &rng, const char *dogwhistle) {
  std::ostringstream s;
  s << Pick(rng, kSubjects) << ' ' << Pick(rng, kVerbs) << ' ';
  const char *object = Pick(rng, kObjects);
  if (dogwhistle != nullptr) {
    s << "the " << dogwhistle;
  } else {
    s << object;
  }
  s << " and it was " << Pick(rng, kMoods);
  return s.str();
}

// 1x1 transparent PNG.
constexpr unsigned char kPlaceholderPng[] = {
    0x89, 0x50, 0x4E, 0x47, 0x0D, 0x0A, 0x1A, 0x0A, 0x00, 0x00, 0x00, 0x0D,
    0x49, 0x48, 0x44, 0x52, 0x00, 0x00, 0x00, 0x01, 0x00, 0x00, 0x00, 0x01,
    0x08, 0x06, 0x00, 0x00, 0x00, 0x1F, 0x15, 0xC4, 0x89, 0x00, 0x00, 0x00,
    0x0D, 0x49, 0x44, 0x41, 0x54, 0x78, 0x9C, 0x63, 0x00, 0x01, 0x00, 0x00,
    0x05, 0x00, 0x01, 0x0D, 0x0A, 0x2D, 0xB4, 0x00, 0x00, 0x00, 0x00, 0x49,
    0x45, 0x4E, 0x44, 0xAE, 0x42, 0x60, 0x82};

}  // namespace

SyntheticCorpus GenerateSynthetic(const SyntheticOptions &options) {
  if (options.count < 10) {
    throw std::invalid_argument("synthetic corpus needs at least 10 memes");
  }
  if (options.min_steps < 1 || options.max_steps < options.min_steps) {
    throw std::invalid_argument("bad synthetic sequence length range");
  }
  Rng rng(options.seed);
  SyntheticCorpus out;
  const auto n_pos = static_cast<size_t>(
      std::llround(options.positive_rate * static_cast<double>(options.count)));

  // Which indices are hateful: a seeded permutation of the first n_pos.
  std::vector<int> labels(options.count, 0);
  for (size_t i = 0; i < n_pos; ++i) labels[i] = 1;
  rng.Shuffle(std::span<int>(labels));

  for (size_t i = 0; i < options.count; ++i) {
    char id_buf[32];
    std::snprintf(id_buf, sizeof(id_buf), "%05zu", 10000 + i);
    const std::string id = id_buf;
    const int label = labels[i];

    MemeRecord meme;
    meme.id = id;
    meme.img = "img/" + id + ".png";
    meme.label = label;

    AnnotationBundle bundle;
    bundle.id = id;
    bundle.caption = std::string("a photo of a ") + Pick(rng, kCaptionObjects);
    bundle.objects = {Pick(rng, kCaptionObjects)};
    bundle.web_entities = {Pick(rng, kWebEntities)};
    bundle.named_entities.push_back(kBenignEntities[rng.Below(kBenignEntities.size())]);

    const bool dogwhistle =
        label == 1 ? rng.Below(2) == 0
                   : rng.Uniform() < options.benign_hate_word_rate;
    const char *word = Pick(rng, kDogwhistles);
    meme.text = Sentence(rng, dogwhistle ? word : nullptr);
    if (label == 1) {
      if (dogwhistle) {
        out.planted[id] = "hate_word_count";
      } else {
        const NamedEntity &ent = kHatefulEntities[rng.Below(kHatefulEntities.size())];
        bundle.named_entities.push_back(ent);
        out.planted[id] = EntityToken(ent);
      }
    }

    double c = rng.Uniform(), nn = rng.Uniform(), e = rng.Uniform();
    const double z = c + nn + e;
    bundle.nli = {c / z, nn / z, e / z};
    bundle.nli.entailment =
        std::max(0.0, 1.0 - bundle.nli.contradiction - bundle.nli.neutral);

    const size_t steps =
        options.min_steps + rng.Below(options.max_steps - options.min_steps + 1);
    const double shift = label ? options.embedding_shift : -options.embedding_shift;
    std::vector<double> values(steps * kEmbeddingWidth);
    for (double &v : values) {
      // Four decimals keep the sidecar compact; the value is then exact in
      // the JSON round trip.
      v = std::round((shift + rng.Normal()) * 1e4) / 1e4;
    }
    bundle.embedding_seq = EmbeddingSequence(kEmbeddingWidth, std::move(values));

    out.memes.push_back(std::move(meme));
    out.annotations.emplace(id, std::move(bundle));
  }
  return out;
}

void WriteSynthetic(const SyntheticCorpus &corpus,
                    const std::filesystem::path &dir, bool write_images) {
  std::filesystem::create_directories(dir);
  WriteMemes(dir / "memes.jsonl", corpus.memes);
  WriteAnnotations(dir / "annotations.jsonl", corpus.annotations);
  std::ofstream planted(dir / "planted.tsv", std::ios::binary);
  if (!planted) throw DataError("cannot write " + (dir / "planted.tsv").string());
  planted << "# id\tplanted_feature\n";
  for (const auto &[id, feature] : corpus.planted) {
    planted << id << '\t' << feature << '\n';
  }
  if (write_images) {
    std::filesystem::create_directories(dir / "img");
    for (const auto &m : corpus.memes) {
      std::ofstream img(dir / m.img, std::ios::binary);
      img.write(reinterpret_cast<const char *>(kPlaceholderPng),
                sizeof(kPlaceholderPng));
    }
  }
}

std::map<std::string, std::string> ReadPlanted(
    const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::map<std::string, std::string> planted;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) continue;
    planted[line.substr(0, tab)] = line.substr(tab + 1);
  }
  return planted;
}

}  // namespace memelens
