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

#ifndef MEMELENS_LSTM_H_
#define MEMELENS_LSTM_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "memelens/corpus.h"

namespace memelens {

// Defaults: one 9-unit LSTM layer, dense layers of 8 (ReLU) and 2 (softmax)
// units, 45 epochs of Adam.
struct LstmParams {
  size_t input_dim = kEmbeddingWidth;
  size_t hidden_units = 9;
  size_t dense1_units = 8;
  size_t dense2_units = 2;
  int epochs = 45;
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  uint64_t seed = 1;
  size_t batch_size = 32;
  // Sequences longer than this are truncated to their first max_steps rows.
  size_t max_steps = 128;
  // Parameters are initialized uniformly in [-init_scale, init_scale].
  double init_scale = 0.08;

  // Throws std::invalid_argument.
  void Validate() const;

  bool operator==(const LstmParams &) const = default;
};

// All trainable parameters live in one flat buffer:
//   Wx [4H x D] | Wh [4H x H] | b [4H] | W1 [D1 x H] | b1 [D1] |
//   W2 [D2 x D1] | b2 [D2]
// with gate blocks ordered input, forget, cell, output.
class LstmModel {
 public:
  LstmModel() = default;
  // Zero weights.
  explicit LstmModel(const LstmParams &params);
  // Uniform [-params.init_scale, params.init_scale] from params.seed.
  static LstmModel Random(const LstmParams &params);

  const LstmParams &params() const { return params_; }
  std::span<double> weights() { return weights_; }
  std::span<const double> weights() const { return weights_; }
  const std::vector<double> &history() const { return history_; }
  void set_history(std::vector<double> history) {
    history_ = std::move(history);
  }

  struct Layout {
    size_t wx, wh, b, w1, b1, w2, b2, total;
  };
  const Layout &layout() const { return layout_; }

  // Class probabilities. Throws std::invalid_argument on an empty sequence
  // or a width other than params().input_dim.
  std::vector<double> Forward(const EmbeddingSequence &sequence) const;
  double PredictPositive(const EmbeddingSequence &sequence) const {
    return Forward(sequence)[1];
  }

  // Binary cross-entropy of the class-1 probability. When `grad` is
  // non-empty it must have weights().size() entries and receives the
  // gradient added onto its current contents.
  double LossAndGradient(const EmbeddingSequence &sequence, int label,
                         std::span<double> grad) const;

  std::string Serialize() const;
  static LstmModel Deserialize(const std::string &text);
  void Save(const std::filesystem::path &path) const;
  static LstmModel Load(const std::filesystem::path &path);

  bool operator==(const LstmModel &other) const {
    return params_ == other.params_ && weights_ == other.weights_ &&
           history_ == other.history_;
  }

 private:
  LstmParams params_;
  Layout layout_{};
  std::vector<double> weights_;
  std::vector<double> history_;

  void Configure(const LstmParams &params);
};

// Mini-batch Adam on binary cross-entropy with full backpropagation through
// time. history() holds the mean loss of each epoch. Throws
// std::invalid_argument on single-class data and TrainingError naming the
// epoch when the loss stops being finite.
LstmModel TrainLstm(std::span<const EmbeddingSequence> sequences,
                    std::span<const int> labels, const LstmParams &params);

// Largest discrepancy between the analytic gradient and central finite
// differences over every parameter. Relative error |a - n| / max(|a|, |n|),
// falling back to the absolute error where both are below 1e-6.
double GradientCheck(const LstmModel &model, const EmbeddingSequence &sequence,
                     int label, double epsilon);

}  // namespace memelens

#endif  // MEMELENS_LSTM_H_
