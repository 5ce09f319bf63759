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

#include "memelens/lstm.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "memelens/errors.h"
#include "memelens/numeric_io.h"
#include "memelens/random.h"
#include "memelens/simd/kernels.h"

namespace memelens {

void LstmParams::Validate() const {
  if (input_dim < 1 || hidden_units < 1 || dense1_units < 1) {
    throw std::invalid_argument("LSTM unit counts must be >= 1");
  }
  if (dense2_units < 2) {
    throw std::invalid_argument("the output layer needs at least 2 units");
  }
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (!(learning_rate > 0.0)) {
    throw std::invalid_argument("learning_rate must be > 0");
  }
  if (!(adam_beta1 > 0.0 && adam_beta1 < 1.0) ||
      !(adam_beta2 > 0.0 && adam_beta2 < 1.0)) {
    throw std::invalid_argument("Adam betas must lie in (0, 1)");
  }
  if (!(adam_eps > 0.0)) throw std::invalid_argument("adam_eps must be > 0");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (max_steps < 1) throw std::invalid_argument("max_steps must be >= 1");
  if (!(init_scale >= 0.0)) {
    throw std::invalid_argument("init_scale must be >= 0");
  }
}

void LstmModel::Configure(const LstmParams &params) {
  params.Validate();
  params_ = params;
  const size_t h = params.hidden_units;
  const size_t g = 4 * h;
  Layout l{};
  l.wx = 0;
  l.wh = l.wx + g * params.input_dim;
  l.b = l.wh + g * h;
  l.w1 = l.b + g;
  l.b1 = l.w1 + params.dense1_units * h;
  l.w2 = l.b1 + params.dense1_units;
  l.b2 = l.w2 + params.dense2_units * params.dense1_units;
  l.total = l.b2 + params.dense2_units;
  layout_ = l;
  weights_.assign(l.total, 0.0);
}

LstmModel::LstmModel(const LstmParams &params) { Configure(params); }

LstmModel LstmModel::Random(const LstmParams &params) {
  LstmModel model(params);
  Rng rng(params.seed);
  for (double &w : model.weights_) {
    w = rng.Uniform(-params.init_scale, params.init_scale);
  }
  return model;
}

namespace {

double Sigm(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double LogSumExp(std::span<const double> x, size_t skip) {
  double mx = -HUGE_VAL;
  for (size_t i = 0; i < x.size(); ++i) {
    if (i != skip) mx = std::max(mx, x[i]);
  }
  double s = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    if (i != skip) s += std::exp(x[i] - mx);
  }
  return mx + std::log(s);
}

// Activations kept for the backward pass.
struct Trace {
  size_t steps = 0;
  std::vector<double> gates;  // steps x 4H, post-activation (i, f, g, o)
  std::vector<double> cell;   // (steps + 1) x H, row 0 is the zero state
  std::vector<double> hidden; // (steps + 1) x H
  std::vector<double> tanh_cell;  // steps x H
  std::vector<double> dense1_pre;
  std::vector<double> dense1;
  std::vector<double> logits;
  std::vector<double> probs;
};

}  // namespace

// The LSTM recurrence, dense head and softmax, recording a Trace.
static void RunForward(const LstmModel &model, const EmbeddingSequence &seq,
                       Trace &tr) {
  const LstmParams &p = model.params();
  const auto &l = model.layout();
  if (seq.empty()) throw std::invalid_argument("empty input sequence");
  if (seq.width() != p.input_dim) {
    throw std::invalid_argument("input width " + std::to_string(seq.width()) +
                                " does not match model input " +
                                std::to_string(p.input_dim));
  }
  const auto w = model.weights();
  const size_t h = p.hidden_units;
  const size_t g4 = 4 * h;
  const size_t steps = std::min(seq.steps(), p.max_steps);
  tr.steps = steps;
  tr.gates.assign(steps * g4, 0.0);
  tr.cell.assign((steps + 1) * h, 0.0);
  tr.hidden.assign((steps + 1) * h, 0.0);
  tr.tanh_cell.assign(steps * h, 0.0);

  const auto wx = w.subspan(l.wx, g4 * p.input_dim);
  const auto wh = w.subspan(l.wh, g4 * h);
  const auto b = w.subspan(l.b, g4);
  for (size_t t = 0; t < steps; ++t) {
    std::span<double> z(tr.gates.data() + t * g4, g4);
    std::copy(b.begin(), b.end(), z.begin());
    simd::Gemv(wx, g4, p.input_dim, seq.step(t), z);
    simd::Gemv(wh, g4, h,
               std::span<const double>(tr.hidden.data() + t * h, h), z);
    const double *c_prev = tr.cell.data() + t * h;
    double *c = tr.cell.data() + (t + 1) * h;
    double *hid = tr.hidden.data() + (t + 1) * h;
    double *tc = tr.tanh_cell.data() + t * h;
    for (size_t k = 0; k < h; ++k) {
      const double ig = Sigm(z[k]);
      const double fg = Sigm(z[h + k]);
      const double gg = std::tanh(z[2 * h + k]);
      const double og = Sigm(z[3 * h + k]);
      z[k] = ig;
      z[h + k] = fg;
      z[2 * h + k] = gg;
      z[3 * h + k] = og;
      c[k] = fg * c_prev[k] + ig * gg;
      tc[k] = std::tanh(c[k]);
      hid[k] = og * tc[k];
    }
  }

  const std::span<const double> last(tr.hidden.data() + steps * h, h);
  tr.dense1_pre.assign(w.begin() + l.b1, w.begin() + l.b1 + p.dense1_units);
  simd::Gemv(w.subspan(l.w1, p.dense1_units * h), p.dense1_units, h, last,
             tr.dense1_pre);
  tr.dense1.resize(p.dense1_units);
  for (size_t k = 0; k < p.dense1_units; ++k) {
    tr.dense1[k] = std::max(0.0, tr.dense1_pre[k]);
  }
  tr.logits.assign(w.begin() + l.b2, w.begin() + l.b2 + p.dense2_units);
  simd::Gemv(w.subspan(l.w2, p.dense2_units * p.dense1_units), p.dense2_units,
             p.dense1_units, tr.dense1, tr.logits);
  const double lse = LogSumExp(tr.logits, tr.logits.size());
  tr.probs.resize(p.dense2_units);
  for (size_t k = 0; k < p.dense2_units; ++k) {
    tr.probs[k] = std::exp(tr.logits[k] - lse);
  }
}

std::vector<double> LstmModel::Forward(const EmbeddingSequence &sequence) const {
  Trace tr;
  RunForward(*this, sequence, tr);
  return tr.probs;
}

double LstmModel::LossAndGradient(const EmbeddingSequence &sequence, int label,
                                  std::span<double> grad) const {
  Trace tr;
  RunForward(*this, sequence, tr);
  const LstmParams &p = params_;
  const auto &l = layout_;
  const size_t h = p.hidden_units;
  const size_t g4 = 4 * h;
  const size_t d1 = p.dense1_units;
  const size_t d2 = p.dense2_units;

  // log p1 and log(1 - p1) straight from the logits.
  const double lse_all = LogSumExp(tr.logits, d2);
  const double log_p1 = tr.logits[1] - lse_all;
  const double log_not_p1 = LogSumExp(tr.logits, 1) - lse_all;
  const double loss = label ? -log_p1 : -log_not_p1;
  if (grad.empty()) return loss;
  if (grad.size() != weights_.size()) {
    throw std::invalid_argument("gradient buffer has the wrong size");
  }

  // dL/dlogit_j = dL/dp1 * p1 * (delta_1j - p_j). For label 1 this is
  // p_j - delta_1j. For label 0 it is p1 for j = 1 and -p1 * q_j otherwise,
  // with q the softmax over the non-positive logits.
  const double p1 = tr.probs[1];
  std::vector<double> dlogits(d2);
  const double lse_rest = LogSumExp(tr.logits, 1);
  for (size_t j = 0; j < d2; ++j) {
    if (label) {
      dlogits[j] = tr.probs[j] - (j == 1 ? 1.0 : 0.0);
    } else {
      dlogits[j] = j == 1 ? p1 : -p1 * std::exp(tr.logits[j] - lse_rest);
    }
  }

  const auto w = weights();
  simd::Ger(dlogits, tr.dense1, grad.subspan(l.w2, d2 * d1));
  for (size_t j = 0; j < d2; ++j) grad[l.b2 + j] += dlogits[j];

  std::vector<double> dz1(d1, 0.0);
  for (size_t j = 0; j < d2; ++j) {
    simd::Axpy(dlogits[j], w.subspan(l.w2 + j * d1, d1), dz1);
  }
  for (size_t k = 0; k < d1; ++k) {
    if (tr.dense1_pre[k] <= 0.0) dz1[k] = 0.0;
  }
  const std::span<const double> last(tr.hidden.data() + tr.steps * h, h);
  simd::Ger(dz1, last, grad.subspan(l.w1, d1 * h));
  for (size_t k = 0; k < d1; ++k) grad[l.b1 + k] += dz1[k];

  std::vector<double> dh(h, 0.0);
  for (size_t k = 0; k < d1; ++k) {
    simd::Axpy(dz1[k], w.subspan(l.w1 + k * h, h), dh);
  }
  std::vector<double> dc(h, 0.0);
  std::vector<double> dz(g4);
  const auto wh = w.subspan(l.wh, g4 * h);
  for (size_t t = tr.steps; t-- > 0;) {
    const double *gate = tr.gates.data() + t * g4;
    const double *c_prev = tr.cell.data() + t * h;
    const double *tc = tr.tanh_cell.data() + t * h;
    for (size_t k = 0; k < h; ++k) {
      const double ig = gate[k];
      const double fg = gate[h + k];
      const double gg = gate[2 * h + k];
      const double og = gate[3 * h + k];
      const double d_o = dh[k] * tc[k];
      const double d_c = dc[k] + dh[k] * og * (1.0 - tc[k] * tc[k]);
      dz[k] = d_c * gg * ig * (1.0 - ig);
      dz[h + k] = d_c * c_prev[k] * fg * (1.0 - fg);
      dz[2 * h + k] = d_c * ig * (1.0 - gg * gg);
      dz[3 * h + k] = d_o * og * (1.0 - og);
      dc[k] = d_c * fg;
    }
    simd::Ger(dz, sequence.step(t), grad.subspan(l.wx, g4 * p.input_dim));
    simd::Ger(dz, std::span<const double>(tr.hidden.data() + t * h, h),
              grad.subspan(l.wh, g4 * h));
    simd::Axpy(1.0, dz, grad.subspan(l.b, g4));
    std::fill(dh.begin(), dh.end(), 0.0);
    for (size_t r = 0; r < g4; ++r) {
      if (dz[r] != 0.0) simd::Axpy(dz[r], wh.subspan(r * h, h), dh);
    }
  }
  return loss;
}

LstmModel TrainLstm(std::span<const EmbeddingSequence> sequences,
                    std::span<const int> labels, const LstmParams &params) {
  params.Validate();
  if (sequences.empty()) throw std::invalid_argument("no training sequences");
  if (sequences.size() != labels.size()) {
    throw std::invalid_argument("sequence and label counts differ");
  }
  size_t n_pos = 0;
  for (size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) {
      throw std::invalid_argument("labels must be 0 or 1");
    }
    if (sequences[i].width() != params.input_dim || sequences[i].empty()) {
      throw std::invalid_argument("sequence " + std::to_string(i) +
                                  " does not match the input width");
    }
    n_pos += labels[i];
  }
  if (n_pos == 0 || n_pos == labels.size()) {
    throw std::invalid_argument("training labels contain a single class");
  }

  LstmModel model = LstmModel::Random(params);
  auto w = model.weights();
  const size_t n_params = w.size();
  std::vector<double> grad(n_params), m(n_params, 0.0), v(n_params, 0.0);
  std::vector<size_t> order(sequences.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(params.seed ^ 0x9E3779B97F4A7C15ull);
  std::vector<double> history;
  double beta1_t = 1.0;
  double beta2_t = 1.0;

  for (int epoch = 1; epoch <= params.epochs; ++epoch) {
    rng.Shuffle(std::span<size_t>(order));
    double epoch_loss = 0.0;
    for (size_t start = 0; start < order.size(); start += params.batch_size) {
      const size_t end = std::min(order.size(), start + params.batch_size);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (size_t k = start; k < end; ++k) {
        const size_t i = order[k];
        epoch_loss += model.LossAndGradient(sequences[i], labels[i], grad);
      }
      if (!std::isfinite(epoch_loss)) {
        throw TrainingError("LSTM loss became non-finite in epoch " +
                            std::to_string(epoch));
      }
      const double scale = 1.0 / static_cast<double>(end - start);
      beta1_t *= params.adam_beta1;
      beta2_t *= params.adam_beta2;
      const double c1 = 1.0 - beta1_t;
      const double c2 = 1.0 - beta2_t;
      for (size_t j = 0; j < n_params; ++j) {
        const double g = grad[j] * scale;
        m[j] = params.adam_beta1 * m[j] + (1.0 - params.adam_beta1) * g;
        v[j] = params.adam_beta2 * v[j] + (1.0 - params.adam_beta2) * g * g;
        w[j] -= params.learning_rate * (m[j] / c1) /
                (std::sqrt(v[j] / c2) + params.adam_eps);
        if (!std::isfinite(w[j])) {
          throw TrainingError("LSTM parameters became non-finite in epoch " +
                              std::to_string(epoch));
        }
      }
    }
    history.push_back(epoch_loss / static_cast<double>(order.size()));
  }
  model.set_history(std::move(history));
  return model;
}

double GradientCheck(const LstmModel &model, const EmbeddingSequence &sequence,
                     int label, double epsilon) {
  std::vector<double> analytic(model.weights().size(), 0.0);
  model.LossAndGradient(sequence, label, analytic);
  LstmModel probe = model;
  auto w = probe.weights();
  double worst = 0.0;
  for (size_t i = 0; i < w.size(); ++i) {
    const double saved = w[i];
    w[i] = saved + epsilon;
    const double up = probe.LossAndGradient(sequence, label, {});
    w[i] = saved - epsilon;
    const double down = probe.LossAndGradient(sequence, label, {});
    w[i] = saved;
    const double numeric = (up - down) / (2.0 * epsilon);
    const double scale = std::max(std::abs(analytic[i]), std::abs(numeric));
    const double diff = std::abs(analytic[i] - numeric);
    worst = std::max(worst, scale < 1e-6 ? diff : diff / scale);
  }
  return worst;
}

// Serialization ------------------------------------------------------------

namespace {

constexpr const char *kLstmMagic = "memelens-lstm";
constexpr int kLstmVersion = 1;

[[noreturn]] void Corrupt(const std::string &what) {
  throw ModelError("lstm model: " + what);
}

}  // namespace

std::string LstmModel::Serialize() const {
  std::ostringstream out;
  const LstmParams &p = params_;
  out << kLstmMagic << ' ' << kLstmVersion << '\n';
  out << "input_dim " << p.input_dim << '\n';
  out << "hidden_units " << p.hidden_units << '\n';
  out << "dense1_units " << p.dense1_units << '\n';
  out << "dense2_units " << p.dense2_units << '\n';
  out << "epochs " << p.epochs << '\n';
  out << "learning_rate " << FormatDouble(p.learning_rate) << '\n';
  out << "adam_beta1 " << FormatDouble(p.adam_beta1) << '\n';
  out << "adam_beta2 " << FormatDouble(p.adam_beta2) << '\n';
  out << "adam_eps " << FormatDouble(p.adam_eps) << '\n';
  out << "seed " << p.seed << '\n';
  out << "batch_size " << p.batch_size << '\n';
  out << "max_steps " << p.max_steps << '\n';
  out << "init_scale " << FormatDouble(p.init_scale) << '\n';
  out << "history " << history_.size();
  for (double x : history_) out << ' ' << FormatDouble(x);
  out << '\n';
  out << "weights " << weights_.size() << '\n';
  for (size_t i = 0; i < weights_.size(); ++i) {
    out << FormatDouble(weights_[i]) << ((i + 1) % 16 == 0 ? '\n' : ' ');
  }
  if (weights_.size() % 16 != 0) out << '\n';
  return out.str();
}

LstmModel LstmModel::Deserialize(const std::string &text) {
  std::istringstream in(text);
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != kLstmMagic) {
    Corrupt("not a memelens lstm model");
  }
  if (version != kLstmVersion) {
    Corrupt("unsupported lstm model version " + std::to_string(version));
  }
  auto next = [&](const char *key) {
    std::string k, v;
    if (!(in >> k >> v) || k != key) {
      Corrupt(std::string("expected '") + key + "'");
    }
    return v;
  };
  auto as_size = [&](const std::string &s) {
    auto v = ParseInt(s);
    if (!v || *v < 0) Corrupt("bad integer '" + s + "'");
    return static_cast<size_t>(*v);
  };
  auto as_double = [&](const std::string &s) {
    auto v = ParseDouble(s);
    if (!v) Corrupt("bad number '" + s + "'");
    return *v;
  };
  LstmParams p;
  p.input_dim = as_size(next("input_dim"));
  p.hidden_units = as_size(next("hidden_units"));
  p.dense1_units = as_size(next("dense1_units"));
  p.dense2_units = as_size(next("dense2_units"));
  p.epochs = static_cast<int>(as_size(next("epochs")));
  p.learning_rate = as_double(next("learning_rate"));
  p.adam_beta1 = as_double(next("adam_beta1"));
  p.adam_beta2 = as_double(next("adam_beta2"));
  p.adam_eps = as_double(next("adam_eps"));
  {
    const std::string s = next("seed");
    uint64_t seed = 0;
    for (char c : s) {
      if (c < '0' || c > '9') Corrupt("bad seed '" + s + "'");
      seed = seed * 10 + static_cast<uint64_t>(c - '0');
    }
    p.seed = seed;
  }
  p.batch_size = as_size(next("batch_size"));
  p.max_steps = as_size(next("max_steps"));
  p.init_scale = as_double(next("init_scale"));

  LstmModel model;
  try {
    model.Configure(p);
  } catch (const std::invalid_argument &e) {
    Corrupt(e.what());
  }
  const size_t n_hist = as_size(next("history"));
  std::vector<double> history(n_hist);
  for (auto &x : history) {
    std::string s;
    if (!(in >> s)) Corrupt("truncated history");
    x = as_double(s);
  }
  model.history_ = std::move(history);
  const size_t n_weights = as_size(next("weights"));
  if (n_weights != model.weights_.size()) {
    Corrupt("weight count " + std::to_string(n_weights) +
            " does not match the architecture (" +
            std::to_string(model.weights_.size()) + ")");
  }
  for (auto &x : model.weights_) {
    std::string s;
    if (!(in >> s)) Corrupt("truncated weights");
    x = as_double(s);
  }
  std::string extra;
  if (in >> extra) Corrupt("trailing data after weights");
  return model;
}

void LstmModel::Save(const std::filesystem::path &path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ModelError("cannot write " + path.string());
  out << Serialize();
  if (!out) throw ModelError("failed writing " + path.string());
}

LstmModel LstmModel::Load(const std::filesystem::path &path) {
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
