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

#include "memelens/gbdt.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "memelens/errors.h"
#include "memelens/numeric_io.h"

namespace memelens {

void GbdtParams::Validate() const {
  if (n_estimators < 1) throw std::invalid_argument("n_estimators must be >= 1");
  if (!(learning_rate > 0.0)) {
    throw std::invalid_argument("learning_rate must be > 0");
  }
  if (max_depth < 1) throw std::invalid_argument("max_depth must be >= 1");
  if (!(scale_pos_weight > 0.0)) {
    throw std::invalid_argument("scale_pos_weight must be > 0");
  }
  if (!(min_gain_prune >= 0.0)) {
    throw std::invalid_argument("min_gain_prune must be >= 0");
  }
  if (min_samples_leaf < 1) {
    throw std::invalid_argument("min_samples_leaf must be >= 1");
  }
  if (!(l2_reg >= 0.0)) throw std::invalid_argument("l2_reg must be >= 0");
}

double Sigmoid(double margin) {
  if (margin >= 0.0) return 1.0 / (1.0 + std::exp(-margin));
  const double e = std::exp(margin);
  return e / (1.0 + e);
}

size_t Tree::LeafIndex(const SparseVector &row) const {
  size_t i = 0;
  while (!nodes[i].is_leaf()) {
    const TreeNode &n = nodes[i];
    i = row.At(static_cast<uint32_t>(n.feature)) < n.threshold ? n.left
                                                                : n.right;
  }
  return i;
}

int Tree::Depth() const {
  // Preorder walk with an explicit depth stack.
  int deepest = 0;
  std::vector<std::pair<size_t, int>> stack = {{0, 0}};
  while (!stack.empty()) {
    auto [i, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    if (!nodes[i].is_leaf()) {
      stack.emplace_back(nodes[i].left, d + 1);
      stack.emplace_back(nodes[i].right, d + 1);
    }
  }
  return deepest;
}

double GbdtModel::Margin(const SparseVector &row) const {
  if (row.dim != dim()) {
    throw ModelError("input has dimension " + std::to_string(row.dim) +
                     " but the model expects " + std::to_string(dim()));
  }
  double sum = 0.0;
  for (const auto &t : trees) sum += t.Predict(row);
  return base_score + params.learning_rate * sum;
}

double GbdtModel::PredictProba(const SparseVector &row) const {
  return Sigmoid(Margin(row));
}

void GbdtModel::RefreshImportances() {
  feature_importances.assign(dim(), 0.0);
  for (const auto &t : trees) {
    for (const auto &n : t.nodes) {
      if (!n.is_leaf()) feature_importances[n.feature] += n.gain;
    }
  }
  const double total = std::accumulate(feature_importances.begin(),
                                       feature_importances.end(), 0.0);
  if (total > 0.0) {
    for (double &x : feature_importances) x /= total;
  }
}

namespace {

// Stable weighted logistic loss for one example.
double LogLoss(double margin, int label) {
  const double softplus = margin > 0.0
                              ? margin + std::log1p(std::exp(-margin))
                              : std::log1p(std::exp(margin));
  return softplus - (label ? margin : 0.0);
}

int CompareRows(const SparseVector &a, int la, const SparseVector &b, int lb) {
  if (la != lb) return la < lb ? -1 : 1;
  const size_t n = std::min(a.entries.size(), b.entries.size());
  for (size_t i = 0; i < n; ++i) {
    const auto &x = a.entries[i];
    const auto &y = b.entries[i];
    if (x.index != y.index) return x.index < y.index ? -1 : 1;
    if (x.value != y.value) return x.value < y.value ? -1 : 1;
  }
  if (a.entries.size() != b.entries.size()) {
    return a.entries.size() < b.entries.size() ? -1 : 1;
  }
  return 0;
}

// Tree under construction. Children are owned; flattened to preorder once
// grown and pruned.
struct BuildNode {
  int32_t feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
  double grad = 0.0;
  double hess = 0.0;
  double value = 0.0;
  std::unique_ptr<BuildNode> left;
  std::unique_ptr<BuildNode> right;

  bool is_leaf() const { return !left; }
};

struct SplitChoice {
  int32_t feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(std::span<const SparseVector> rows, std::span<const double> grad,
              std::span<const double> hess, const GbdtParams &params,
              size_t dim)
      : rows_(rows), grad_(grad), hess_(hess), params_(params),
        buckets_(dim) {}

  std::unique_ptr<BuildNode> Grow(std::vector<uint32_t> samples, int depth) {
    auto node = std::make_unique<BuildNode>();
    for (uint32_t r : samples) {
      node->grad += grad_[r];
      node->hess += hess_[r];
    }
    node->value = LeafValue(node->grad, node->hess);
    if (depth >= params_.max_depth ||
        samples.size() < 2 * static_cast<size_t>(params_.min_samples_leaf)) {
      return node;
    }
    const SplitChoice best = FindBestSplit(samples, node->grad, node->hess);
    if (best.feature < 0) return node;

    std::vector<uint32_t> left, right;
    for (uint32_t r : samples) {
      (rows_[r].At(static_cast<uint32_t>(best.feature)) < best.threshold
           ? left
           : right)
          .push_back(r);
    }
    node->feature = best.feature;
    node->threshold = best.threshold;
    node->gain = best.gain;
    samples = {};
    node->left = Grow(std::move(left), depth + 1);
    node->right = Grow(std::move(right), depth + 1);
    return node;
  }

 private:
  double LeafValue(double g, double h) const {
    const double denom = h + params_.l2_reg;
    return denom > 0.0 ? -g / denom : 0.0;
  }

  double Score(double g, double h) const {
    const double denom = h + params_.l2_reg;
    return denom > 0.0 ? g * g / denom : 0.0;
  }

  struct Group {
    double value;
    double grad;
    double hess;
    size_t count;
  };

  SplitChoice FindBestSplit(const std::vector<uint32_t> &samples,
                            double node_grad, double node_hess) {
    std::vector<uint32_t> touched;
    for (uint32_t r : samples) {
      for (const auto &e : rows_[r].entries) {
        auto &bucket = buckets_[e.index];
        if (bucket.empty()) touched.push_back(e.index);
        bucket.emplace_back(e.value, r);
      }
    }
    std::sort(touched.begin(), touched.end());

    const double parent = Score(node_grad, node_hess);
    const size_t min_leaf = static_cast<size_t>(params_.min_samples_leaf);
    SplitChoice best;
    std::vector<Group> groups;
    for (uint32_t f : touched) {
      auto &bucket = buckets_[f];
      std::sort(bucket.begin(), bucket.end());
      // Absent entries form one group at value 0, slotted into value order.
      double zero_grad = node_grad;
      double zero_hess = node_hess;
      for (const auto &[v, r] : bucket) {
        zero_grad -= grad_[r];
        zero_hess -= hess_[r];
      }
      const size_t zero_count = samples.size() - bucket.size();
      groups.clear();
      bool zero_placed = zero_count == 0;
      auto push = [&](double v, double g, double h, size_t c) {
        if (!groups.empty() && groups.back().value == v) {
          groups.back().grad += g;
          groups.back().hess += h;
          groups.back().count += c;
        } else {
          groups.push_back({v, g, h, c});
        }
      };
      for (const auto &[v, r] : bucket) {
        if (!zero_placed && v >= 0.0) {
          push(0.0, zero_grad, zero_hess, zero_count);
          zero_placed = true;
        }
        push(v, grad_[r], hess_[r], 1);
      }
      if (!zero_placed) push(0.0, zero_grad, zero_hess, zero_count);
      bucket.clear();

      double gl = 0.0, hl = 0.0;
      size_t nl = 0;
      for (size_t i = 0; i + 1 < groups.size(); ++i) {
        gl += groups[i].grad;
        hl += groups[i].hess;
        nl += groups[i].count;
        const size_t nr = samples.size() - nl;
        if (nl < min_leaf) continue;
        if (nr < min_leaf) break;
        const double gain =
            0.5 * (Score(gl, hl) + Score(node_grad - gl, node_hess - hl) -
                   parent);
        if (gain > kMinSplitGain && gain > best.gain) {
          double threshold = 0.5 * (groups[i].value + groups[i + 1].value);
          if (!(threshold > groups[i].value)) threshold = groups[i + 1].value;
          best = {static_cast<int32_t>(f), threshold, gain};
        }
      }
    }
    return best;
  }

  std::span<const SparseVector> rows_;
  std::span<const double> grad_;
  std::span<const double> hess_;
  const GbdtParams &params_;
  std::vector<std::vector<std::pair<double, uint32_t>>> buckets_;
};

void Prune(BuildNode &node, const GbdtParams &params) {
  if (node.is_leaf()) return;
  Prune(*node.left, params);
  Prune(*node.right, params);
  if (node.left->is_leaf() && node.right->is_leaf() &&
      node.gain < params.min_gain_prune) {
    node.left.reset();
    node.right.reset();
    node.feature = -1;
    node.threshold = 0.0;
    node.gain = 0.0;
  }
}

// Appends `node` in preorder and returns its index.
int32_t Flatten(const BuildNode &node, Tree &tree) {
  const auto index = static_cast<int32_t>(tree.nodes.size());
  tree.nodes.emplace_back();
  TreeNode out;
  out.cover = node.hess;
  if (node.is_leaf()) {
    out.value = node.value;
    out.expected = node.value;
  } else {
    out.feature = node.feature;
    out.threshold = node.threshold;
    out.gain = node.gain;
    out.left = Flatten(*node.left, tree);
    out.right = Flatten(*node.right, tree);
    const TreeNode &l = tree.nodes[out.left];
    const TreeNode &r = tree.nodes[out.right];
    const double c = l.cover + r.cover;
    out.expected = c > 0.0 ? (l.cover * l.expected + r.cover * r.expected) / c
                           : 0.5 * (l.expected + r.expected);
  }
  tree.nodes[index] = out;
  return index;
}

}  // namespace

GbdtModel TrainGbdt(std::span<const SparseVector> rows,
                    std::span<const int> labels, const GbdtParams &params,
                    std::vector<std::string> feature_names) {
  params.Validate();
  if (rows.empty()) throw std::invalid_argument("no training rows");
  if (rows.size() != labels.size()) {
    throw std::invalid_argument("row and label counts differ");
  }
  const size_t dim = rows[0].dim;
  size_t n_pos = 0;
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].dim != dim) {
      throw std::invalid_argument("row " + std::to_string(i) +
                                  " has dimension " +
                                  std::to_string(rows[i].dim) + ", expected " +
                                  std::to_string(dim));
    }
    if (!rows[i].IsValid()) {
      throw std::invalid_argument("row " + std::to_string(i) +
                                  " is not a valid sparse vector");
    }
    if (labels[i] != 0 && labels[i] != 1) {
      throw std::invalid_argument("labels must be 0 or 1");
    }
    n_pos += labels[i];
  }
  if (n_pos == 0 || n_pos == rows.size()) {
    throw std::invalid_argument("training labels contain a single class");
  }
  if (feature_names.empty()) {
    for (size_t f = 0; f < dim; ++f) feature_names.push_back("f" + std::to_string(f));
  }
  if (feature_names.size() != dim) {
    throw std::invalid_argument("feature name count does not match dimension");
  }

  std::vector<size_t> order(rows.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return CompareRows(rows[a], labels[a], rows[b], labels[b]) < 0;
  });
  std::vector<SparseVector> x;
  std::vector<int> y;
  x.reserve(rows.size());
  for (size_t i : order) {
    x.push_back(rows[i]);
    y.push_back(labels[i]);
  }
  const size_t n = x.size();
  std::vector<double> weight(n);
  double weight_sum = 0.0;
  for (size_t i = 0; i < n; ++i) {
    weight[i] = y[i] ? params.scale_pos_weight : 1.0;
    weight_sum += weight[i];
  }

  GbdtModel model;
  model.params = params;
  model.feature_names = std::move(feature_names);
  const double n_neg = static_cast<double>(n - n_pos);
  model.base_score =
      std::log(params.scale_pos_weight * static_cast<double>(n_pos) / n_neg);

  std::vector<double> margin(n, model.base_score);
  auto weighted_loss = [&] {
    double total = 0.0;
    for (size_t i = 0; i < n; ++i) total += weight[i] * LogLoss(margin[i], y[i]);
    return total / weight_sum;
  };
  model.loss_history.push_back(weighted_loss());

  std::vector<double> grad(n), hess(n);
  std::vector<uint32_t> all(n);
  std::iota(all.begin(), all.end(), 0u);
  for (int round = 0; round < params.n_estimators; ++round) {
    for (size_t i = 0; i < n; ++i) {
      const double p = Sigmoid(margin[i]);
      grad[i] = weight[i] * (p - y[i]);
      hess[i] = weight[i] * p * (1.0 - p);
    }
    TreeBuilder builder(x, grad, hess, params, dim);
    auto root = builder.Grow(all, 0);
    Prune(*root, params);
    Tree tree;
    Flatten(*root, tree);
    for (size_t i = 0; i < n; ++i) {
      margin[i] += params.learning_rate * tree.Predict(x[i]);
    }
    model.trees.push_back(std::move(tree));
    model.loss_history.push_back(weighted_loss());
  }
  model.RefreshImportances();
  return model;
}

ImportanceReport FeatureImportanceReport(const GbdtModel &model,
                                         size_t top_k) {
  ImportanceReport report;
  for (size_t f = 0; f < model.feature_importances.size(); ++f) {
    if (model.feature_importances[f] > 0.0) {
      report.ranked.push_back(
          {model.feature_names[f], model.feature_importances[f]});
    }
  }
  report.positive_count = report.ranked.size();
  std::sort(report.ranked.begin(), report.ranked.end(),
            [](const FeatureScore &a, const FeatureScore &b) {
              if (a.score != b.score) return a.score > b.score;
              return a.name < b.name;
            });
  if (report.ranked.size() > top_k) report.ranked.resize(top_k);
  return report;
}

Attribution AttributePrediction(const GbdtModel &model, const SparseVector &row,
                                size_t top_k) {
  Attribution out;
  out.margin = model.Margin(row);
  const double lr = model.params.learning_rate;
  std::vector<std::pair<uint32_t, double>> credits;
  double expectation = 0.0;
  for (const auto &tree : model.trees) {
    size_t i = 0;
    expectation += tree.nodes[0].expected;
    while (!tree.nodes[i].is_leaf()) {
      const TreeNode &node = tree.nodes[i];
      const size_t next =
          row.At(static_cast<uint32_t>(node.feature)) < node.threshold
              ? node.left
              : node.right;
      credits.emplace_back(node.feature,
                           lr * (tree.nodes[next].expected - node.expected));
      i = next;
    }
  }
  out.bias = model.base_score + lr * expectation;

  std::sort(credits.begin(), credits.end(),
            [](const auto &a, const auto &b) { return a.first < b.first; });
  for (size_t i = 0; i < credits.size();) {
    const uint32_t f = credits[i].first;
    double sum = 0.0;
    for (; i < credits.size() && credits[i].first == f; ++i) {
      sum += credits[i].second;
    }
    if (sum != 0.0) out.contributions.push_back({f, model.feature_names[f], sum});
  }
  std::sort(out.contributions.begin(), out.contributions.end(),
            [](const FeatureContribution &a, const FeatureContribution &b) {
              const double ma = std::abs(a.contribution);
              const double mb = std::abs(b.contribution);
              if (ma != mb) return ma > mb;
              return a.index < b.index;
            });
  if (out.contributions.size() > top_k) out.contributions.resize(top_k);
  return out;
}

// Serialization ------------------------------------------------------------

namespace {

constexpr const char *kGbdtMagic = "memelens-gbdt";
constexpr int kGbdtVersion = 1;

class LineReader {
 public:
  explicit LineReader(const std::string &text) : in_(text) {}

  std::vector<std::string> Fields() {
    std::string line;
    if (!std::getline(in_, line)) Fail("unexpected end of file");
    ++line_no_;
    std::vector<std::string> out;
    std::istringstream ss(line);
    std::string f;
    while (ss >> f) out.push_back(f);
    return out;
  }

  std::string RawLine() {
    std::string line;
    if (!std::getline(in_, line)) Fail("unexpected end of file");
    ++line_no_;
    return line;
  }

  std::vector<std::string> Expect(const std::string &key, size_t count) {
    auto f = Fields();
    if (f.size() != count + 1 || f[0] != key) {
      Fail("expected '" + key + "' with " + std::to_string(count) +
           " value(s)");
    }
    return f;
  }

  double Double(const std::string &s) {
    auto v = ParseDouble(s);
    if (!v) Fail("bad number '" + s + "'");
    return *v;
  }

  long long Int(const std::string &s) {
    auto v = ParseInt(s);
    if (!v) Fail("bad integer '" + s + "'");
    return *v;
  }

  [[noreturn]] void Fail(const std::string &what) const {
    throw ModelError("gbdt model, line " + std::to_string(line_no_) + ": " +
                     what);
  }

 private:
  std::istringstream in_;
  size_t line_no_ = 0;
};

}  // namespace

std::string GbdtModel::Serialize() const {
  std::ostringstream out;
  out << kGbdtMagic << ' ' << kGbdtVersion << '\n';
  out << "n_estimators " << params.n_estimators << '\n';
  out << "learning_rate " << FormatDouble(params.learning_rate) << '\n';
  out << "max_depth " << params.max_depth << '\n';
  out << "scale_pos_weight " << FormatDouble(params.scale_pos_weight) << '\n';
  out << "min_gain_prune " << FormatDouble(params.min_gain_prune) << '\n';
  out << "min_samples_leaf " << params.min_samples_leaf << '\n';
  out << "l2_reg " << FormatDouble(params.l2_reg) << '\n';
  out << "base_score " << FormatDouble(base_score) << '\n';
  out << "loss_history " << loss_history.size();
  for (double l : loss_history) out << ' ' << FormatDouble(l);
  out << '\n';
  out << "features " << feature_names.size() << '\n';
  for (const auto &name : feature_names) out << name << '\n';
  out << "trees " << trees.size() << '\n';
  for (const auto &t : trees) {
    out << "tree " << t.nodes.size() << '\n';
    for (const auto &n : t.nodes) {
      if (n.is_leaf()) {
        out << "L " << FormatDouble(n.value) << ' ' << FormatDouble(n.cover)
            << '\n';
      } else {
        out << "N " << n.feature << ' ' << FormatDouble(n.threshold) << ' '
            << FormatDouble(n.gain) << ' ' << FormatDouble(n.cover) << ' '
            << FormatDouble(n.expected) << '\n';
      }
    }
  }
  return out.str();
}

namespace {

// Reads one subtree in preorder starting at the reader's position.
int32_t ReadNode(LineReader &in, Tree &tree, size_t limit, size_t dim) {
  if (tree.nodes.size() >= limit) in.Fail("tree has more nodes than declared");
  const auto index = static_cast<int32_t>(tree.nodes.size());
  tree.nodes.emplace_back();
  auto f = in.Fields();
  TreeNode node;
  if (f.size() == 3 && f[0] == "L") {
    node.value = in.Double(f[1]);
    node.cover = in.Double(f[2]);
    node.expected = node.value;
  } else if (f.size() == 6 && f[0] == "N") {
    const long long feature = in.Int(f[1]);
    if (feature < 0 || static_cast<size_t>(feature) >= dim) {
      in.Fail("split feature out of range");
    }
    node.feature = static_cast<int32_t>(feature);
    node.threshold = in.Double(f[2]);
    node.gain = in.Double(f[3]);
    node.cover = in.Double(f[4]);
    node.expected = in.Double(f[5]);
    node.left = ReadNode(in, tree, limit, dim);
    node.right = ReadNode(in, tree, limit, dim);
  } else {
    in.Fail("malformed tree node");
  }
  tree.nodes[index] = node;
  return index;
}

}  // namespace

GbdtModel GbdtModel::Deserialize(const std::string &text) {
  LineReader in(text);
  GbdtModel model;
  auto header = in.Fields();
  if (header.size() != 2 || header[0] != kGbdtMagic) {
    in.Fail("not a memelens gbdt model");
  }
  if (in.Int(header[1]) != kGbdtVersion) {
    in.Fail("unsupported gbdt model version " + header[1]);
  }
  model.params.n_estimators =
      static_cast<int>(in.Int(in.Expect("n_estimators", 1)[1]));
  model.params.learning_rate = in.Double(in.Expect("learning_rate", 1)[1]);
  model.params.max_depth = static_cast<int>(in.Int(in.Expect("max_depth", 1)[1]));
  model.params.scale_pos_weight =
      in.Double(in.Expect("scale_pos_weight", 1)[1]);
  model.params.min_gain_prune = in.Double(in.Expect("min_gain_prune", 1)[1]);
  model.params.min_samples_leaf =
      static_cast<int>(in.Int(in.Expect("min_samples_leaf", 1)[1]));
  model.params.l2_reg = in.Double(in.Expect("l2_reg", 1)[1]);
  model.base_score = in.Double(in.Expect("base_score", 1)[1]);

  auto hist = in.Fields();
  if (hist.size() < 2 || hist[0] != "loss_history" ||
      hist.size() != 2 + static_cast<size_t>(in.Int(hist[1]))) {
    in.Fail("malformed loss_history");
  }
  for (size_t i = 2; i < hist.size(); ++i) {
    model.loss_history.push_back(in.Double(hist[i]));
  }

  const auto n_features = in.Int(in.Expect("features", 1)[1]);
  if (n_features < 0) in.Fail("negative feature count");
  for (long long i = 0; i < n_features; ++i) {
    model.feature_names.push_back(in.RawLine());
  }
  const auto n_trees = in.Int(in.Expect("trees", 1)[1]);
  if (n_trees < 0) in.Fail("negative tree count");
  for (long long t = 0; t < n_trees; ++t) {
    const auto count = in.Int(in.Expect("tree", 1)[1]);
    if (count < 1) in.Fail("empty tree");
    Tree tree;
    tree.nodes.reserve(count);
    ReadNode(in, tree, static_cast<size_t>(count), model.dim());
    if (tree.nodes.size() != static_cast<size_t>(count)) {
      in.Fail("tree node count mismatch");
    }
    model.trees.push_back(std::move(tree));
  }
  try {
    model.params.Validate();
  } catch (const std::invalid_argument &e) {
    in.Fail(e.what());
  }
  model.RefreshImportances();
  return model;
}

void GbdtModel::Save(const std::filesystem::path &path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ModelError("cannot write " + path.string());
  out << Serialize();
  if (!out) throw ModelError("failed writing " + path.string());
}

GbdtModel GbdtModel::Load(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelError("cannot open model " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return Deserialize(buf.str());
  } catch (const ModelError &e) {
    throw ModelError(path.string() + ": " + e.what());
  }
}

}  // namespace memelens
