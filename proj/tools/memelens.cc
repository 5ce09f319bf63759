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


// memelens: command-line front end for the hateful meme toolkit.

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "commands.h"
#include "memelens/errors.h"
#include "memelens/review_server.h"

#ifndef MEMELENS_DEFAULT_LEXICONS
#define MEMELENS_DEFAULT_LEXICONS "data/lexicons"
#endif

namespace {

using namespace memelens;
using namespace memelens::cli;

void AddCorpusOptions(CLI::App *sub, RunConfig &cfg, bool lexicons) {
  sub->add_option("--memes", cfg.memes, "memes JSONL file")
      ->envname("MEMELENS_MEMES");
  sub->add_option("--annotations", cfg.annotations, "annotations JSONL file")
      ->envname("MEMELENS_ANNOTATIONS");
  if (lexicons) {
    sub->add_option("--lexicons", cfg.lexicons, "lexicon directory")
        ->envname("MEMELENS_LEXICONS")
        ->capture_default_str();
  }
  sub->add_option("--split-seed", cfg.split_seed, "seed for the 80/10/10 split")
      ->capture_default_str();
}

void AddGbdtOptions(CLI::App *sub, RunConfig &cfg) {
  GbdtParams &g = cfg.gbdt;
  sub->add_option("--n-estimators", g.n_estimators)->capture_default_str();
  sub->add_option("--gbdt-learning-rate", g.learning_rate)
      ->capture_default_str();
  sub->add_option("--max-depth", g.max_depth)->capture_default_str();
  sub->add_option("--scale-pos-weight", g.scale_pos_weight)
      ->capture_default_str();
  sub->add_option("--min-gain-prune", g.min_gain_prune)->capture_default_str();
  sub->add_option("--min-samples-leaf", g.min_samples_leaf)
      ->capture_default_str();
  sub->add_option("--l2-reg", g.l2_reg)->capture_default_str();
  sub->add_option("--min-df", cfg.tfidf.min_df, "minimum document frequency")
      ->capture_default_str();
  sub->add_option("--max-features", cfg.tfidf.max_features,
                  "keep the most frequent terms only");
}

void AddLstmOptions(CLI::App *sub, RunConfig &cfg) {
  LstmParams &l = cfg.lstm;
  sub->add_option("--hidden-units", l.hidden_units)->capture_default_str();
  sub->add_option("--dense1-units", l.dense1_units)->capture_default_str();
  sub->add_option("--epochs", l.epochs)->capture_default_str();
  sub->add_option("--lstm-learning-rate", l.learning_rate)
      ->capture_default_str();
  sub->add_option("--batch-size", l.batch_size)->capture_default_str();
  sub->add_option("--max-steps", l.max_steps, "truncate longer sequences")
      ->capture_default_str();
  sub->add_option("--lstm-seed", l.seed)->capture_default_str();
}

void AddThreshold(CLI::App *sub, RunConfig &cfg) {
  sub->add_option("--threshold", cfg.threshold, "decision threshold")
      ->envname("MEMELENS_THRESHOLD")
      ->capture_default_str();
}

void ParseListen(const std::string &listen, ServeOptions &options) {
  auto colon = listen.rfind(':');
  if (colon == std::string::npos) throw UsageError("--listen expects host:port");
  options.host = listen.substr(0, colon);
  try {
    size_t used = 0;
    options.port = std::stoi(listen.substr(colon + 1), &used);
    if (used != listen.size() - colon - 1) throw std::invalid_argument("");
  } catch (const std::exception &) {
    throw UsageError("--listen has a bad port: " + listen);
  }
  if (options.port < 0 || options.port > 65535) {
    throw UsageError("--listen port out of range");
  }
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"memelens: interpretable hateful meme classification"};
  app.set_version_flag("--version", std::string(kVersion));
  app.set_config("--config", "", "TOML/INI file of option defaults");
  app.require_subcommand(1);

  RunConfig cfg;
  cfg.lexicons = MEMELENS_DEFAULT_LEXICONS;
  std::string kind_name;
  std::string split_name = "validation";
  std::filesystem::path out;
  int folds = 5;
  uint64_t fold_seed = 11;
  std::string listen = "127.0.0.1:8080";
  ServeOptions serve;
  SyntheticCommand synth;

  auto *split = app.add_subcommand("split", "assign train/validation/test");
  AddCorpusOptions(split, cfg, false);
  split->add_option("--out", out, "write an id<TAB>split manifest");

  auto *train = app.add_subcommand("train", "fit a model on the train split");
  train->add_option("kind", kind_name, "gbdt or lstm")->required();
  AddCorpusOptions(train, cfg, true);
  AddGbdtOptions(train, cfg);
  AddLstmOptions(train, cfg);
  AddThreshold(train, cfg);
  train->add_option("--model-out", cfg.model_out)->required();
  train->add_option("--vocab-out", cfg.vocab, "default <model-out>.vocab");
  train->add_option("--report-out", cfg.report,
                    "default <model-out>.report.json");

  auto *evaluate = app.add_subcommand("evaluate", "score a held-out split");
  AddCorpusOptions(evaluate, cfg, true);
  AddThreshold(evaluate, cfg);
  evaluate->add_option("--model", cfg.model_in)->envname("MEMELENS_MODEL");
  evaluate->add_option("--vocab", cfg.vocab, "default <model>.vocab");
  evaluate->add_option("--split", split_name, "validation or test")
      ->capture_default_str();

  auto *cv = app.add_subcommand("cv", "k-fold cross-validation");
  cv->add_option("kind", kind_name, "gbdt or lstm")->required();
  AddCorpusOptions(cv, cfg, true);
  AddGbdtOptions(cv, cfg);
  AddLstmOptions(cv, cfg);
  AddThreshold(cv, cfg);
  cv->add_option("--folds", folds)->capture_default_str();
  cv->add_option("--fold-seed", fold_seed)->capture_default_str();
  cv->add_option("--out", out, "write the fold summary as JSON");

  auto *augment = app.add_subcommand("augment", "export flagged memes");
  AddCorpusOptions(augment, cfg, true);
  AddThreshold(augment, cfg);
  augment->add_option("--model", cfg.model_in)->envname("MEMELENS_MODEL");
  augment->add_option("--vocab", cfg.vocab, "default <model>.vocab");
  augment->add_option("--top-k", cfg.top_k)->capture_default_str();
  augment->add_option("--out", out, "JSONL output")->required();

  auto *srv = app.add_subcommand("serve", "run the review service");
  AddCorpusOptions(srv, cfg, true);
  AddThreshold(srv, cfg);
  srv->add_option("--model", cfg.model_in)->envname("MEMELENS_MODEL");
  srv->add_option("--vocab", cfg.vocab, "default <model>.vocab");
  srv->add_option("--top-k", cfg.top_k)->capture_default_str();
  srv->add_option("--listen", listen, "host:port, port 0 picks a free one")
      ->envname("MEMELENS_LISTEN")
      ->capture_default_str();
  srv->add_option("--label-log", serve.label_log)
      ->envname("MEMELENS_LABEL_LOG")
      ->capture_default_str();
  srv->add_option("--image-root", serve.image_root,
                  "default: directory of the memes file");
  srv->add_option("--ui-dir", serve.ui_dir, "static files for the browser UI");

  auto *gen = app.add_subcommand("gen-synthetic", "write a synthetic corpus");
  gen->add_option("--out-dir", synth.out_dir)->required();
  gen->add_option("--count", synth.count)->capture_default_str();
  gen->add_option("--seed", synth.seed)->capture_default_str();
  bool no_images = false;
  gen->add_flag("--no-images", no_images, "skip the placeholder PNGs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (split->parsed()) return CmdSplit(cfg, out);
    if (train->parsed()) return CmdTrain(cfg, ParseModelKind(kind_name));
    if (evaluate->parsed()) {
      auto which = ParseSplit(split_name);
      if (!which || *which == Split::kUnassigned || *which == Split::kTrain) {
        throw UsageError("--split must be validation or test");
      }
      return CmdEvaluate(cfg, *which);
    }
    if (cv->parsed()) {
      return CmdCrossValidate(cfg, ParseModelKind(kind_name), folds, fold_seed,
                              out);
    }
    if (augment->parsed()) return CmdAugment(cfg, out);
    if (srv->parsed()) {
      ParseListen(listen, serve);
      return CmdServe(cfg, serve);
    }
    if (gen->parsed()) {
      synth.images = !no_images;
      return CmdGenSynthetic(synth);
    }
  } catch (const UsageError &e) {
    std::cerr << "memelens: " << e.what() << '\n';
    return 1;
  } catch (const DataError &e) {
    std::cerr << "memelens: data error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "memelens: error: " << e.what() << '\n';
    return 3;
  }
  return 1;
}
