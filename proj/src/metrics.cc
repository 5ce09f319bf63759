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

#include "memelens/metrics.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "memelens/numeric_io.h"

namespace memelens {

double Auroc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw std::invalid_argument("scores and labels differ in length");
  }
  const size_t n = scores.size();
  for (double s : scores) {
    if (std::isnan(s)) throw std::invalid_argument("auROC score is NaN");
  }
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return scores[a] < scores[b]; });
  // Sum of doubled 1-based mid-ranks of the positives.
  unsigned long long rank2_pos = 0;
  unsigned long long n_pos = 0;
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const unsigned long long rank2 = i + 1 + j;  // (i+1) + j = 2 * midrank
    for (size_t k = i; k < j; ++k) {
      if (labels[order[k]]) {
        rank2_pos += rank2;
        ++n_pos;
      }
    }
    i = j;
  }
  const unsigned long long n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw std::invalid_argument("auROC needs both classes");
  }
  const unsigned long long u2 = rank2_pos - n_pos * (n_pos + 1);
  return static_cast<double>(u2) / static_cast<double>(2 * n_pos * n_neg);
}

Classification ClassificationMetrics(std::span<const double> scores,
                                     std::span<const int> labels,
                                     double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw std::invalid_argument("threshold must lie in (0, 1)");
  }
  if (scores.size() != labels.size() || scores.empty()) {
    throw std::invalid_argument("scores and labels differ in length");
  }
  size_t tp = 0, fp = 0, tn = 0, fn = 0;
  for (size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] >= threshold;
    if (labels[i]) {
      predicted ? ++tp : ++fn;
    } else {
      predicted ? ++fp : ++tn;
    }
  }
  Classification c;
  c.accuracy = static_cast<double>(tp + tn) / static_cast<double>(scores.size());
  c.precision = tp + fp == 0 ? 0.0
                             : static_cast<double>(tp) /
                                   static_cast<double>(tp + fp);
  c.recall = tp + fn == 0 ? 0.0
                          : static_cast<double>(tp) /
                                static_cast<double>(tp + fn);
  return c;
}

EvalReport Evaluate(std::span<const double> scores, std::span<const int> labels,
                    double threshold) {
  EvalReport r;
  r.auroc = Auroc(scores, labels);
  const Classification c = ClassificationMetrics(scores, labels, threshold);
  r.accuracy = c.accuracy;
  r.precision = c.precision;
  r.recall = c.recall;
  r.threshold = threshold;
  for (int y : labels) y ? ++r.n_pos : ++r.n_neg;
  return r;
}

CvSummary CrossValidate(const Trainer &trainer, std::span<const Fold> folds,
                        const std::map<std::string, int> &labels,
                        double threshold) {
  if (folds.size() < 2) {
    throw std::invalid_argument("cross-validation needs at least 2 folds");
  }
  CvSummary summary;
  for (size_t f = 0; f < folds.size(); ++f) {
    try {
      Scorer scorer = trainer(folds[f].train_ids);
      const auto scores = scorer(folds[f].holdout_ids);
      std::vector<int> y;
      for (const auto &id : folds[f].holdout_ids) y.push_back(labels.at(id));
      summary.folds.push_back(Evaluate(scores, y, threshold));
    } catch (const std::exception &e) {
      throw std::runtime_error("fold " + std::to_string(f + 1) + ": " +
                               e.what());
    }
  }
  const double k = static_cast<double>(summary.folds.size());
  auto column = [&](double EvalReport::*field, EvalReport &mean,
                    EvalReport &sd) {
    double sum = 0.0;
    for (const auto &r : summary.folds) sum += r.*field;
    const double mu = sum / k;
    double ss = 0.0;
    for (const auto &r : summary.folds) ss += (r.*field - mu) * (r.*field - mu);
    mean.*field = mu;
    sd.*field = std::sqrt(ss / (k - 1.0));
  };
  for (auto field : {&EvalReport::auroc, &EvalReport::accuracy,
                     &EvalReport::precision, &EvalReport::recall}) {
    column(field, summary.mean, summary.stddev);
  }
  summary.mean.threshold = summary.stddev.threshold = threshold;
  for (const auto &r : summary.folds) {
    summary.mean.n_pos += r.n_pos;
    summary.mean.n_neg += r.n_neg;
  }
  return summary;
}

std::string FormatReport(const EvalReport &r) {
  std::ostringstream out;
  out << "auroc " << FormatDouble(r.auroc) << '\n'
      << "accuracy " << FormatDouble(r.accuracy) << '\n'
      << "precision " << FormatDouble(r.precision) << '\n'
      << "recall " << FormatDouble(r.recall) << '\n'
      << "threshold " << FormatDouble(r.threshold) << '\n'
      << "n_pos " << r.n_pos << '\n'
      << "n_neg " << r.n_neg << '\n';
  return out.str();
}

std::string FormatCv(const CvSummary &s) {
  std::ostringstream out;
  for (size_t f = 0; f < s.folds.size(); ++f) {
    const auto &r = s.folds[f];
    out << "fold " << f + 1 << " auroc " << FormatDouble(r.auroc)
        << " accuracy " << FormatDouble(r.accuracy) << " precision "
        << FormatDouble(r.precision) << " recall " << FormatDouble(r.recall)
        << '\n';
  }
  out << "mean_auroc " << FormatDouble(s.mean.auroc) << '\n'
      << "std_auroc " << FormatDouble(s.stddev.auroc) << '\n'
      << "mean_accuracy " << FormatDouble(s.mean.accuracy) << '\n'
      << "std_accuracy " << FormatDouble(s.stddev.accuracy) << '\n'
      << "mean_precision " << FormatDouble(s.mean.precision) << '\n'
      << "std_precision " << FormatDouble(s.stddev.precision) << '\n'
      << "mean_recall " << FormatDouble(s.mean.recall) << '\n'
      << "std_recall " << FormatDouble(s.stddev.recall) << '\n';
  return out.str();
}

nlohmann::json ToJson(const EvalReport &r) {
  return {{"auroc", r.auroc},         {"accuracy", r.accuracy},
          {"precision", r.precision}, {"recall", r.recall},
          {"threshold", r.threshold}, {"n_pos", r.n_pos},
          {"n_neg", r.n_neg}};
}

nlohmann::json ToJson(const CvSummary &s) {
  nlohmann::json folds = nlohmann::json::array();
  for (const auto &r : s.folds) folds.push_back(ToJson(r));
  auto stats = [](const EvalReport &r) {
    return nlohmann::json{{"auroc", r.auroc},
                          {"accuracy", r.accuracy},
                          {"precision", r.precision},
                          {"recall", r.recall}};
  };
  return {{"folds", folds}, {"mean", stats(s.mean)}, {"stddev", stats(s.stddev)},
          {"threshold", s.mean.threshold}};
}

}  // namespace memelens
