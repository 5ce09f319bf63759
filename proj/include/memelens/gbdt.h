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

#ifndef MEMELENS_GBDT_H_
#define MEMELENS_GBDT_H_

#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "memelens/text_vectorizer.h"

namespace memelens {

// Defaults: 100 trees at learning rate 1.0, depth up to 40.
struct GbdtParams {
  int n_estimators = 100;
  double learning_rate = 1.0;
  int max_depth = 40;
  double scale_pos_weight = 1.5;
  // Internal nodes whose children are leaves and whose gain is below this
  // are collapsed after each tree is grown.
  double min_gain_prune = 0.0;
  int min_samples_leaf = 1;
  // L2 penalty on leaf values (the lambda of second-order boosting).
  double l2_reg = 1.0;

  // Throws std::invalid_argument.
  void Validate() const;

  bool operator==(const GbdtParams &) const = default;
};

// Splits smaller than this are treated as noise and never made.
inline constexpr double kMinSplitGain = 1e-12;

struct TreeNode {
  int32_t feature = -1;  // -1 on leaves
  double threshold = 0.0;
  int32_t left = -1;  // taken when value < threshold; absent features are 0
  int32_t right = -1;
  double gain = 0.0;
  double value = 0.0;     // leaf log-odds increment
  double cover = 0.0;     // sum of training hessians reaching the node
  double expected = 0.0;  // cover-weighted mean leaf value of the subtree

  bool is_leaf() const { return left < 0; }
  bool operator==(const TreeNode &) const = default;
};

// Nodes in preorder; nodes[0] is the root.
struct Tree {
  std::vector<TreeNode> nodes;

  size_t LeafIndex(const SparseVector &row) const;
  double Predict(const SparseVector &row) const {
    return nodes[LeafIndex(row)].value;
  }
  int Depth() const;

  bool operator==(const Tree &) const = default;
};

class GbdtModel {
 public:
  GbdtParams params;
  double base_score = 0.0;
  std::vector<Tree> trees;
  std::vector<std::string> feature_names;
  // Normalized total split gain per input column.
  std::vector<double> feature_importances;
  // Weighted mean training log-loss: entry 0 before any tree, then one per
  // round.
  std::vector<double> loss_history;

  size_t dim() const { return feature_names.size(); }
  bool trained() const { return !feature_names.empty(); }

  // base_score + learning_rate * sum of tree outputs. Throws ModelError on a
  // dimension mismatch.
  double Margin(const SparseVector &row) const;
  double PredictProba(const SparseVector &row) const;

  // Recomputes feature_importances from the split gains.
  void RefreshImportances();

  std::string Serialize() const;
  static GbdtModel Deserialize(const std::string &text);
  void Save(const std::filesystem::path &path) const;
  static GbdtModel Load(const std::filesystem::path &path);

  bool operator==(const GbdtModel &) const = default;
};

double Sigmoid(double margin);

// Boosting on class-weighted logistic loss with exact greedy splits. Rows are
// put in a canonical order first, so the result does not depend on the input
// order. Throws std::invalid_argument on single-class labels or mismatched
// dimensions. `feature_names` may be empty, in which case columns are named
// f0, f1, ...
GbdtModel TrainGbdt(std::span<const SparseVector> rows,
                    std::span<const int> labels, const GbdtParams &params,
                    std::vector<std::string> feature_names = {});

struct FeatureScore {
  std::string name;
  double score = 0.0;
};

struct ImportanceReport {
  std::vector<FeatureScore> ranked;  // descending score, ties by name
  size_t positive_count = 0;         // features with nonzero importance
};

ImportanceReport FeatureImportanceReport(const GbdtModel &model,
                                         size_t top_k);

struct FeatureContribution {
  uint32_t index = 0;
  std::string name;
  double contribution = 0.0;
};

struct Attribution {
  // base_score plus the cover-weighted expectation of every tree.
  double bias = 0.0;
  // Nonzero contributions, by |contribution| descending then index.
  std::vector<FeatureContribution> contributions;
  double margin = 0.0;
};

// Path attribution: every split on the decision path credits its feature
// with the change in cover-weighted expected leaf value between the node and
// the child taken. bias + sum(contributions) reconstructs the margin when no
// truncation is requested.
Attribution AttributePrediction(
    const GbdtModel &model, const SparseVector &row,
    size_t top_k = std::numeric_limits<size_t>::max());

}  // namespace memelens

#endif  // MEMELENS_GBDT_H_
