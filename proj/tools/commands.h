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


#ifndef MEMELENS_TOOLS_COMMANDS_H_
#define MEMELENS_TOOLS_COMMANDS_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include "memelens/features.h"
#include "memelens/gbdt.h"
#include "memelens/lstm.h"

namespace memelens::cli {

// Bad flag combinations detected after parsing. Maps to exit code 1.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ModelKind { kGbdt, kLstm };

struct RunConfig {
  std::filesystem::path memes;
  std::filesystem::path annotations;
  std::filesystem::path lexicons;
  std::filesystem::path model_in;
  std::filesystem::path model_out;
  std::filesystem::path vocab;   // defaults to <model>.vocab
  std::filesystem::path report;  // defaults to <model_out>.report.json
  uint64_t split_seed = 7;
  GbdtParams gbdt;
  LstmParams lstm;
  TfidfOptions tfidf;
  double threshold = 0.5;
  size_t top_k = 8;
};

ModelKind ParseModelKind(const std::string &name);
ModelKind DetectModelKind(const std::filesystem::path &path);

int CmdSplit(const RunConfig &config, const std::filesystem::path &manifest);
int CmdTrain(const RunConfig &config, ModelKind kind);
int CmdEvaluate(const RunConfig &config, Split split);
int CmdCrossValidate(const RunConfig &config, ModelKind kind, int folds,
                     uint64_t fold_seed, const std::filesystem::path &out);
int CmdAugment(const RunConfig &config, const std::filesystem::path &out);

struct ServeOptions {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path label_log = "labels.jsonl";
  std::filesystem::path image_root;  // defaults to the memes file directory
  std::filesystem::path ui_dir;
};

int CmdServe(const RunConfig &config, const ServeOptions &options);

struct SyntheticCommand {
  std::filesystem::path out_dir;
  size_t count = 400;
  uint64_t seed = 1;
  bool images = true;
};

int CmdGenSynthetic(const SyntheticCommand &command);

}  // namespace memelens::cli

#endif  // MEMELENS_TOOLS_COMMANDS_H_
