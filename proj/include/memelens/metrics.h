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

#ifndef MEMELENS_METRICS_H_
#define MEMELENS_METRICS_H_

#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "memelens/corpus.h"

namespace memelens {

// Probability that a random positive outscores a random negative, ties
// counting one half. Computed from integer doubled mid-ranks, so the result
// is the correctly rounded value of the exact rational. Throws
// std::invalid_argument when a class is missing.
double Auroc(std::span<const double> scores, std::span<const int> labels);

struct Classification {
  double accuracy = 0.0;
  double precision = 0.0;  // 0 when nothing is predicted positive
  double recall = 0.0;
};

// Predicted positive iff score >= threshold. Threshold must lie in (0, 1).
Classification ClassificationMetrics(std::span<const double> scores,
                                     std::span<const int> labels,
                                     double threshold);

struct EvalReport {
  double auroc = 0.0;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double threshold = 0.5;
  size_t n_pos = 0;
  size_t n_neg = 0;
};

EvalReport Evaluate(std::span<const double> scores, std::span<const int> labels,
                    double threshold = 0.5);

struct CvSummary {
  std::vector<EvalReport> folds;
  EvalReport mean;    // counts are totals over folds
  EvalReport stddev;  // sample standard deviation; counts unused
};

// Maps ids to model scores.
using Scorer = std::function<std::vector<double>(
    const std::vector<std::string> &ids)>;
// Trains on the given ids and returns a scorer for held-out ids.
using Trainer = std::function<Scorer(const std::vector<std::string> &ids)>;

// Trains once per fold and evaluates on its holdout. Exceptions from the
// trainer are rethrown as std::runtime_error prefixed with the fold number.
CvSummary CrossValidate(const Trainer &trainer, std::span<const Fold> folds,
                        const std::map<std::string, int> &labels,
                        double threshold = 0.5);

// "key value" lines in a fixed order.
std::string FormatReport(const EvalReport &report);
std::string FormatCv(const CvSummary &summary);

nlohmann::json ToJson(const EvalReport &report);
nlohmann::json ToJson(const CvSummary &summary);

}  // namespace memelens

#endif  // MEMELENS_METRICS_H_
