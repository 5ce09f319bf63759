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


#include "commands.h"

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <vector>

#include "json.hpp"
#include "memelens/augment.h"
#include "memelens/corpus.h"
#include "memelens/errors.h"
#include "memelens/lexicon_features.h"
#include "memelens/metrics.h"
#include "memelens/review_server.h"
#include "memelens/review_service.h"
#include "memelens/synthetic.h"

namespace memelens::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

void RequirePath(const fs::path &path, const char *flag) {
  if (path.empty()) throw UsageError(std::string(flag) + " is required");
  if (!fs::exists(path)) throw DataError("no such file: " + path.string());
}

fs::path VocabPath(const RunConfig &config, const fs::path &model) {
  if (!config.vocab.empty()) return config.vocab;
  return fs::path(model.string() + ".vocab");
}

struct Inputs {
  Corpus corpus;
  LexiconSet lexicons;
};

// Paths are checked up front so a typo fails before any work is done.
Inputs LoadInputs(const RunConfig &config, bool need_lexicons) {
  RequirePath(config.memes, "--memes");
  RequirePath(config.annotations, "--annotations");
  if (need_lexicons) RequirePath(config.lexicons, "--lexicons");
  Inputs in;
  in.corpus = AssignSplits(LoadCorpus(config.memes, config.annotations),
                           config.split_seed);
  if (need_lexicons) in.lexicons = LoadLexicons(config.lexicons);
  return in;
}

std::vector<const MemeRecord *> UsableLabeled(const Corpus &corpus,
                                              Split split) {
  std::vector<const MemeRecord *> out;
  for (const MemeRecord *r : corpus.InSplit(split)) {
    if (r->label && corpus.Usable(r->id)) out.push_back(r);
  }
  return out;
}

std::vector<int> LabelsOf(std::span<const MemeRecord *const> records) {
  std::vector<int> labels;
  labels.reserve(records.size());
  for (const MemeRecord *r : records) labels.push_back(*r->label);
  return labels;
}

void RequireBothClasses(std::span<const int> labels, const std::string &what) {
  size_t pos = 0;
  for (int y : labels) pos += y == 1;
  if (labels.empty() || pos == 0 || pos == labels.size()) {
    throw InsufficientDataError(what + " needs labeled examples of both classes");
  }
}

void ValidateParams(const RunConfig &config) {
  try {
    config.gbdt.Validate();
    config.lstm.Validate();
  } catch (const std::invalid_argument &e) {
    throw UsageError(e.what());
  }
  if (!(config.threshold > 0.0 && config.threshold < 1.0)) {
    throw UsageError("--threshold must lie in (0, 1)");
  }
}

// A trained gbdt model paired with the featurizer that produced its inputs.
struct GbdtArtifacts {
  std::unique_ptr<FeaturePipeline> pipeline;
  GbdtModel model;

  double Score(const Corpus &corpus, const MemeRecord &record) const {
    return model.PredictProba(
        pipeline->Row(record, *corpus.Annotation(record.id)));
  }
};

GbdtArtifacts FitGbdt(const RunConfig &config, const Corpus &corpus,
                      const LexiconSet &lexicons,
                      std::span<const MemeRecord *const> train) {
  std::vector<int> labels = LabelsOf(train);
  RequireBothClasses(labels, "gbdt training");
  GbdtArtifacts out;
  out.pipeline = std::make_unique<FeaturePipeline>(
      lexicons, FeaturePipeline::FitVocabulary(corpus, train, config.tfidf));
  std::vector<SparseVector> rows;
  rows.reserve(train.size());
  for (const MemeRecord *r : train) {
    rows.push_back(out.pipeline->Row(*r, *corpus.Annotation(r->id)));
  }
  out.model = TrainGbdt(rows, labels, config.gbdt,
                        out.pipeline->feature_names());
  return out;
}

GbdtArtifacts LoadGbdt(const RunConfig &config, const LexiconSet &lexicons) {
  GbdtArtifacts out;
  out.model = GbdtModel::Load(config.model_in);
  fs::path vocab_path = VocabPath(config, config.model_in);
  if (!fs::exists(vocab_path)) {
    throw ModelError("missing vocabulary " + vocab_path.string());
  }
  out.pipeline = std::make_unique<FeaturePipeline>(
      lexicons, Vocabulary::Load(vocab_path));
  if (out.model.dim() != out.pipeline->dim()) {
    throw ModelError("model expects " + std::to_string(out.model.dim()) +
                     " features but the vocabulary yields " +
                     std::to_string(out.pipeline->dim()));
  }
  if (out.model.feature_names != out.pipeline->feature_names()) {
    throw ModelError("model feature names do not match the vocabulary");
  }
  return out;
}

std::vector<EmbeddingSequence> SequencesOf(
    const Corpus &corpus, std::span<const MemeRecord *const> records) {
  std::vector<EmbeddingSequence> out;
  out.reserve(records.size());
  for (const MemeRecord *r : records) {
    out.push_back(corpus.Annotation(r->id)->embedding_seq);
  }
  return out;
}

void CheckLstmInput(const LstmModel &model, const Corpus &corpus) {
  for (const auto &[id, bundle] : corpus.annotations()) {
    if (bundle.embedding_seq.width() != model.params().input_dim) {
      throw ModelError("lstm model expects input width " +
                       std::to_string(model.params().input_dim) + " but " +
                       id + " has width " +
                       std::to_string(bundle.embedding_seq.width()));
    }
  }
}

std::vector<double> ScoreLstm(const LstmModel &model, const Corpus &corpus,
                              std::span<const MemeRecord *const> records) {
  std::vector<double> scores;
  scores.reserve(records.size());
  for (const MemeRecord *r : records) {
    scores.push_back(
        model.PredictPositive(corpus.Annotation(r->id)->embedding_seq));
  }
  return scores;
}

void WriteText(const fs::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

std::atomic<ReviewServer *> g_server{nullptr};

extern "C" void HandleStopSignal(int) {
  if (ReviewServer *server = g_server.load()) server->Stop();
}

}  // namespace

ModelKind ParseModelKind(const std::string &name) {
  if (name == "gbdt") return ModelKind::kGbdt;
  if (name == "lstm") return ModelKind::kLstm;
  throw UsageError("unknown model kind '" + name + "' (expected gbdt or lstm)");
}

ModelKind DetectModelKind(const fs::path &path) {
  if (path.empty()) throw UsageError("--model is required");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("no such file: " + path.string());
  std::string magic;
  in >> magic;
  if (magic == "memelens-gbdt") return ModelKind::kGbdt;
  if (magic == "memelens-lstm") return ModelKind::kLstm;
  throw ModelError(path.string() +
                   ": unrecognized model format (expected a memelens-gbdt or "
                   "memelens-lstm header)");
}

int CmdSplit(const RunConfig &config, const fs::path &manifest) {
  Inputs in = LoadInputs(config, false);
  std::map<Split, size_t> counts;
  std::string rows;
  for (const MemeRecord &r : in.corpus.records()) {
    ++counts[r.split];
    rows += r.id + '\t' + std::string(SplitName(r.split)) + '\n';
  }
  if (!manifest.empty()) WriteText(manifest, rows);
  for (Split s : {Split::kTrain, Split::kValidation, Split::kTest,
                  Split::kUnassigned}) {
    std::cout << SplitName(s) << ' ' << counts[s] << '\n';
  }
  return 0;
}

int CmdTrain(const RunConfig &config, ModelKind kind) {
  ValidateParams(config);
  if (config.model_out.empty()) throw UsageError("--model-out is required");
  Inputs in = LoadInputs(config, kind == ModelKind::kGbdt);
  auto train = UsableLabeled(in.corpus, Split::kTrain);
  auto valid = UsableLabeled(in.corpus, Split::kValidation);
  if (valid.empty()) {
    throw InsufficientDataError("validation split has no usable labeled memes");
  }
  std::vector<int> valid_labels = LabelsOf(valid);
  std::vector<double> scores;
  json report;
  report["split_seed"] = config.split_seed;
  report["n_train"] = train.size();

  if (kind == ModelKind::kGbdt) {
    GbdtArtifacts art = FitGbdt(config, in.corpus, in.lexicons, train);
    art.model.Save(config.model_out);
    art.pipeline->vocabulary().Save(VocabPath(config, config.model_out));
    for (const MemeRecord *r : valid) scores.push_back(art.Score(in.corpus, *r));
    ImportanceReport imp = FeatureImportanceReport(art.model, 20);
    report["model"] = "gbdt";
    report["positive_importance_count"] = imp.positive_count;
    json top = json::array();
    for (const FeatureScore &f : imp.ranked) {
      top.push_back({{"name", f.name}, {"importance", f.score}});
    }
    report["top_features"] = top;
    report["loss_history"] = art.model.loss_history;
  } else {
    std::vector<int> labels = LabelsOf(train);
    RequireBothClasses(labels, "lstm training");
    LstmModel model = TrainLstm(SequencesOf(in.corpus, train), labels,
                                config.lstm);
    model.Save(config.model_out);
    scores = ScoreLstm(model, in.corpus, valid);
    report["model"] = "lstm";
    report["history"] = model.history();
  }

  EvalReport eval = Evaluate(scores, valid_labels, config.threshold);
  report["validation"] = ToJson(eval);
  fs::path report_path = config.report.empty()
                             ? fs::path(config.model_out.string() +
                                        ".report.json")
                             : config.report;
  WriteText(report_path, report.dump(2) + "\n");
  std::cout << "split validation\n" << FormatReport(eval);
  return 0;
}

int CmdEvaluate(const RunConfig &config, Split split) {
  ValidateParams(config);
  ModelKind kind = DetectModelKind(config.model_in);
  Inputs in = LoadInputs(config, kind == ModelKind::kGbdt);
  auto records = UsableLabeled(in.corpus, split);
  if (records.empty()) {
    throw InsufficientDataError(std::string(SplitName(split)) +
                                " split has no usable labeled memes");
  }
  std::vector<double> scores;
  if (kind == ModelKind::kGbdt) {
    GbdtArtifacts art = LoadGbdt(config, in.lexicons);
    for (const MemeRecord *r : records) {
      scores.push_back(art.Score(in.corpus, *r));
    }
  } else {
    LstmModel model = LstmModel::Load(config.model_in);
    CheckLstmInput(model, in.corpus);
    scores = ScoreLstm(model, in.corpus, records);
  }
  EvalReport eval = Evaluate(scores, LabelsOf(records), config.threshold);
  std::cout << "split " << SplitName(split) << '\n' << FormatReport(eval);
  return 0;
}

int CmdCrossValidate(const RunConfig &config, ModelKind kind, int folds,
                     uint64_t fold_seed, const fs::path &out) {
  ValidateParams(config);
  if (folds < 2) throw UsageError("--folds must be >= 2");
  Inputs in = LoadInputs(config, kind == ModelKind::kGbdt);
  const Corpus &corpus = in.corpus;
  std::vector<Fold> plan = MakeFolds(corpus, folds, fold_seed);
  std::map<std::string, int> labels;
  for (const MemeRecord *r : corpus.Labeled()) labels[r->id] = *r->label;

  auto resolve = [&corpus](const std::vector<std::string> &ids) {
    std::vector<const MemeRecord *> records;
    records.reserve(ids.size());
    for (const std::string &id : ids) records.push_back(corpus.Find(id));
    return records;
  };

  Trainer trainer;
  if (kind == ModelKind::kGbdt) {
    trainer = [&](const std::vector<std::string> &ids) -> Scorer {
      auto art = std::make_shared<GbdtArtifacts>(
          FitGbdt(config, corpus, in.lexicons, resolve(ids)));
      return [art, &corpus, resolve](const std::vector<std::string> &ids) {
        std::vector<double> scores;
        for (const MemeRecord *r : resolve(ids)) {
          scores.push_back(art->Score(corpus, *r));
        }
        return scores;
      };
    };
  } else {
    trainer = [&](const std::vector<std::string> &ids) -> Scorer {
      auto records = resolve(ids);
      std::vector<int> y = LabelsOf(records);
      RequireBothClasses(y, "lstm training");
      auto model = std::make_shared<LstmModel>(
          TrainLstm(SequencesOf(corpus, records), y, config.lstm));
      return [model, &corpus, resolve](const std::vector<std::string> &ids) {
        return ScoreLstm(*model, corpus, resolve(ids));
      };
    };
  }

  CvSummary summary = CrossValidate(trainer, plan, labels, config.threshold);
  if (!out.empty()) WriteText(out, ToJson(summary).dump(2) + "\n");
  std::cout << FormatCv(summary);
  return 0;
}

namespace {

std::vector<AugmentedMeme> AugmentAll(const RunConfig &config,
                                      const Corpus &corpus,
                                      const GbdtArtifacts &art) {
  std::vector<AugmentedMeme> out;
  for (const MemeRecord &r : corpus.records()) {
    const AnnotationBundle *bundle = corpus.Annotation(r.id);
    if (bundle == nullptr) continue;
    out.push_back(AugmentMeme(r, *bundle, art.model, *art.pipeline,
                              config.top_k, config.threshold));
  }
  return out;
}

GbdtArtifacts LoadGbdtForAttribution(const RunConfig &config,
                                     const LexiconSet &lexicons) {
  if (DetectModelKind(config.model_in) != ModelKind::kGbdt) {
    throw UsageError(
        "attribution is only supported for gbdt models; " +
        config.model_in.string() + " is an lstm model");
  }
  return LoadGbdt(config, lexicons);
}

}  // namespace

int CmdAugment(const RunConfig &config, const fs::path &out) {
  if (out.empty()) throw UsageError("--out is required");
  if (!(config.threshold >= 0.0 && config.threshold <= 1.0)) {
    throw UsageError("--threshold must lie in [0, 1]");
  }
  RequirePath(config.model_in, "--model");
  Inputs in = LoadInputs(config, true);
  GbdtArtifacts art = LoadGbdtForAttribution(config, in.lexicons);
  std::string lines;
  size_t flagged = 0;
  for (const AugmentedMeme &m : AugmentAll(config, in.corpus, art)) {
    if (m.score < config.threshold) continue;
    json j = ToJson(m);
    j["img"] = in.corpus.Find(m.id)->img;
    lines += j.dump() + '\n';
    ++flagged;
  }
  WriteText(out, lines);
  std::cout << "flagged " << flagged << '\n';
  return 0;
}

int CmdServe(const RunConfig &config, const ServeOptions &options) {
  if (!(config.threshold >= 0.0 && config.threshold <= 1.0)) {
    throw UsageError("--threshold must lie in [0, 1]");
  }
  RequirePath(config.model_in, "--model");
  Inputs in = LoadInputs(config, true);
  GbdtArtifacts art = LoadGbdtForAttribution(config, in.lexicons);
  std::map<std::string, std::string> images;
  for (const MemeRecord &r : in.corpus.records()) images[r.id] = r.img;

  ReviewService service(AugmentAll(config, in.corpus, art), std::move(images),
                        config.threshold, options.label_log);
  fs::path image_root = options.image_root.empty()
                            ? fs::absolute(config.memes).parent_path()
                            : options.image_root;
  json health = {{"model", config.model_in.string()},
                 {"memes", service.size()},
                 {"flag_threshold", config.threshold}};
  ReviewServer server(service, image_root, health);
  if (!options.ui_dir.empty() && !server.MountStatic(options.ui_dir)) {
    throw DataError("cannot serve ui directory " + options.ui_dir.string());
  }
  int port = options.port;
  if (port == 0) {
    port = server.BindToAnyPort(options.host);
    if (port < 0) throw std::runtime_error("cannot bind " + options.host);
  } else if (!server.Bind(options.host, port)) {
    throw std::runtime_error("cannot bind " + options.host + ":" +
                             std::to_string(port));
  }
  g_server.store(&server);
  std::signal(SIGINT, HandleStopSignal);
  std::signal(SIGTERM, HandleStopSignal);
  std::cout << "listening on http://" << options.host << ':' << port
            << std::endl;
  bool ok = server.ListenAfterBind();
  g_server.store(nullptr);
  return ok ? 0 : 3;
}

int CmdGenSynthetic(const SyntheticCommand &command) {
  if (command.out_dir.empty()) throw UsageError("--out-dir is required");
  if (command.count < 10) throw UsageError("--count must be >= 10");
  SyntheticOptions options;
  options.count = command.count;
  options.seed = command.seed;
  options.write_images = command.images;
  SyntheticCorpus corpus = GenerateSynthetic(options);
  WriteSynthetic(corpus, command.out_dir, command.images);
  size_t positives = 0;
  for (const MemeRecord &r : corpus.memes) positives += r.label == 1;
  std::cout << "memes " << corpus.memes.size() << "\npositives " << positives
            << "\nwrote " << command.out_dir.string() << '\n';
  return 0;
}

}  // namespace memelens::cli
