// Copyright 2026 The wsner Authors.
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

#include "wsner/tagger.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "wsner/errors.h"
#include "wsner/text.h"

namespace wsner {

namespace {

enum BlockIndex {
  kForwardInput,
  kForwardRecurrent,
  kForwardBias,
  kBackwardInput,
  kBackwardRecurrent,
  kBackwardBias,
  kFeatureWeight,
  kFeatureBias,
  kOutputWeight,
  kOutputBias,
  kEmbeddings,
};

double Sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Column-wise softmax.
Eigen::MatrixXd Softmax(const Eigen::MatrixXd &logits) {
  Eigen::MatrixXd probs(logits.rows(), logits.cols());
  for (Eigen::Index t = 0; t < logits.cols(); ++t) {
    double max = logits.col(t).maxCoeff();
    Eigen::VectorXd e = (logits.col(t).array() - max).exp();
    probs.col(t) = e / e.sum();
  }
  return probs;
}

void FillUniform(double *data, int count, double bound, Rng &rng) {
  for (int i = 0; i < count; ++i) data[i] = rng.Uniform(-bound, bound);
}

}  // namespace

// ---------------------------------------------------------------------------
// EmbeddingTable

EmbeddingTable::EmbeddingTable(const std::vector<std::string> &words,
                               const RowMatrix &vectors) {
  if (static_cast<Eigen::Index>(words.size()) != vectors.rows()) {
    throw Error("embedding word count does not match vector rows");
  }
  std::vector<int> keep;
  for (size_t i = 0; i < words.size(); ++i) {
    if (index_.emplace(words[i], static_cast<int>(words_.size())).second) {
      words_.push_back(words[i]);
      keep.push_back(static_cast<int>(i));
    }
  }
  matrix_.resize(static_cast<Eigen::Index>(keep.size()), vectors.cols());
  for (size_t r = 0; r < keep.size(); ++r) matrix_.row(r) = vectors.row(keep[r]);
  if (!matrix_.allFinite()) throw Error("embedding vectors must be finite");
  unk_ = matrix_.rows() > 0 ? Eigen::VectorXd(matrix_.colwise().mean().transpose())
                            : Eigen::VectorXd::Zero(matrix_.cols());
}

EmbeddingTable EmbeddingTable::Parse(std::istream &in, const std::string &name) {
  std::string line;
  int line_number = 1;
  if (!std::getline(in, line)) throw ParseError(name, 1, "missing header");
  auto header = SplitSpaces(line);
  long count = 0, dim = 0;
  try {
    if (header.size() != 2) throw std::invalid_argument("arity");
    count = std::stol(header[0]);
    dim = std::stol(header[1]);
  } catch (const std::exception &) {
    throw ParseError(name, 1, "header must be \"<count> <dimension>\"");
  }
  if (count < 0 || dim <= 0) {
    throw ParseError(name, 1, "invalid count or dimension");
  }

  std::vector<std::string> words;
  RowMatrix vectors(count, dim);
  while (static_cast<long>(words.size()) < count) {
    if (!std::getline(in, line)) {
      throw ParseError(name, line_number + 1,
                       "expected " + std::to_string(count) + " vectors, found " +
                           std::to_string(words.size()));
    }
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto fields = SplitSpaces(line);
    if (static_cast<long>(fields.size()) != dim + 1) {
      throw ParseError(name, line_number,
                       "expected word and " + std::to_string(dim) + " values");
    }
    Eigen::Index row = static_cast<Eigen::Index>(words.size());
    for (long j = 0; j < dim; ++j) {
      char *end = nullptr;
      vectors(row, j) = std::strtod(fields[j + 1].c_str(), &end);
      if (end == fields[j + 1].c_str() || *end != '\0' ||
          !std::isfinite(vectors(row, j))) {
        throw ParseError(name, line_number, "bad value \"" + fields[j + 1] + "\"");
      }
    }
    words.push_back(fields[0]);
  }
  while (std::getline(in, line)) {
    ++line_number;
    if (!SplitSpaces(line).empty() && !(line.size() == 1 && line[0] == '\r')) {
      throw ParseError(name, line_number, "more vectors than the header declares");
    }
  }
  return EmbeddingTable(words, vectors);
}

EmbeddingTable EmbeddingTable::Load(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return Parse(in, path);
}

void EmbeddingTable::Save(const std::string &path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  out << size() << ' ' << dimension() << '\n';
  char buffer[32];
  for (int r = 0; r < size(); ++r) {
    out << words_[r];
    for (int j = 0; j < dimension(); ++j) {
      std::snprintf(buffer, sizeof(buffer), " %.17g", matrix_(r, j));
      out << buffer;
    }
    out << '\n';
  }
}

int EmbeddingTable::Index(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? -1 : it->second;
}

Eigen::VectorXd EmbeddingTable::Lookup(std::string_view token) const {
  int row = Index(token);
  if (row < 0) return unk_;
  return matrix_.row(row).transpose();
}

// ---------------------------------------------------------------------------
// Configuration and parameters

std::string_view CellTypeName(CellType cell) {
  return cell == CellType::kLstm ? "lstm" : "rnn";
}

CellType ParseCellType(std::string_view name) {
  if (name == "lstm") return CellType::kLstm;
  if (name == "rnn") return CellType::kRnn;
  throw Error("unknown cell type \"" + std::string(name) + "\"");
}

void TaggerConfig::Validate() const {
  if (hidden_size < 1) throw Error("hidden_size must be at least 1");
  if (feature_size < 1) throw Error("feature_size must be at least 1");
  if (!(learning_rate > 0.0)) throw Error("learning_rate must be positive");
  if (epochs < 0) throw Error("epochs must be non-negative");
}

TaggerShape MakeShape(const TaggerConfig &config, const EmbeddingTable &table,
                      int label_count) {
  config.Validate();
  TaggerShape shape;
  shape.input_size = table.dimension();
  shape.hidden_size = config.hidden_size;
  shape.feature_size = config.feature_size;
  shape.label_count = label_count;
  shape.cell = config.cell;
  shape.embedding_rows = config.fine_tune_embeddings ? table.size() + 1 : 0;
  return shape;
}

TaggerParams::TaggerParams(const TaggerShape &shape) : shape_(shape) {
  const int g = shape.gate_count() * shape.hidden_size;
  const int d = shape.input_size;
  const int h = shape.hidden_size;
  int offset = 0;
  auto add = [&](std::string name, int rows, int cols) {
    blocks_.push_back({std::move(name), rows, cols, offset});
    offset += rows * cols;
  };
  add("forward.input", g, d);
  add("forward.recurrent", g, h);
  add("forward.bias", g, 1);
  add("backward.input", g, d);
  add("backward.recurrent", g, h);
  add("backward.bias", g, 1);
  add("feature.weight", shape.feature_size, 2 * h);
  add("feature.bias", shape.feature_size, 1);
  add("output.weight", shape.label_count, shape.feature_size);
  add("output.bias", shape.label_count, 1);
  add("embeddings", shape.embedding_rows, d);
  values_ = Eigen::VectorXd::Zero(offset);
}

#define WSNER_MATRIX_VIEW(Type, index)                                     \
  Type(values_.data() + blocks_[index].offset, blocks_[index].rows,        \
       blocks_[index].cols)
#define WSNER_VECTOR_VIEW(Type, index) \
  Type(values_.data() + blocks_[index].offset, blocks_[index].rows)

TaggerParams::MatrixView TaggerParams::CellInput(int direction) {
  return WSNER_MATRIX_VIEW(MatrixView, kForwardInput + 3 * direction);
}
TaggerParams::MatrixView TaggerParams::CellRecurrent(int direction) {
  return WSNER_MATRIX_VIEW(MatrixView, kForwardRecurrent + 3 * direction);
}
TaggerParams::VectorView TaggerParams::CellBias(int direction) {
  return WSNER_VECTOR_VIEW(VectorView, kForwardBias + 3 * direction);
}
TaggerParams::MatrixView TaggerParams::FeatureWeight() {
  return WSNER_MATRIX_VIEW(MatrixView, kFeatureWeight);
}
TaggerParams::VectorView TaggerParams::FeatureBias() {
  return WSNER_VECTOR_VIEW(VectorView, kFeatureBias);
}
TaggerParams::MatrixView TaggerParams::OutputWeight() {
  return WSNER_MATRIX_VIEW(MatrixView, kOutputWeight);
}
TaggerParams::VectorView TaggerParams::OutputBias() {
  return WSNER_VECTOR_VIEW(VectorView, kOutputBias);
}
TaggerParams::EmbeddingView TaggerParams::Embeddings() {
  return WSNER_MATRIX_VIEW(EmbeddingView, kEmbeddings);
}

TaggerParams::ConstMatrixView TaggerParams::CellInput(int direction) const {
  return WSNER_MATRIX_VIEW(ConstMatrixView, kForwardInput + 3 * direction);
}
TaggerParams::ConstMatrixView TaggerParams::CellRecurrent(int direction) const {
  return WSNER_MATRIX_VIEW(ConstMatrixView, kForwardRecurrent + 3 * direction);
}
TaggerParams::ConstVectorView TaggerParams::CellBias(int direction) const {
  return WSNER_VECTOR_VIEW(ConstVectorView, kForwardBias + 3 * direction);
}
TaggerParams::ConstMatrixView TaggerParams::FeatureWeight() const {
  return WSNER_MATRIX_VIEW(ConstMatrixView, kFeatureWeight);
}
TaggerParams::ConstVectorView TaggerParams::FeatureBias() const {
  return WSNER_VECTOR_VIEW(ConstVectorView, kFeatureBias);
}
TaggerParams::ConstMatrixView TaggerParams::OutputWeight() const {
  return WSNER_MATRIX_VIEW(ConstMatrixView, kOutputWeight);
}
TaggerParams::ConstVectorView TaggerParams::OutputBias() const {
  return WSNER_VECTOR_VIEW(ConstVectorView, kOutputBias);
}
TaggerParams::ConstEmbeddingView TaggerParams::Embeddings() const {
  return WSNER_MATRIX_VIEW(ConstEmbeddingView, kEmbeddings);
}

#undef WSNER_MATRIX_VIEW
#undef WSNER_VECTOR_VIEW

TaggerParams InitParams(const TaggerShape &shape, const EmbeddingTable &table,
                        Rng &rng) {
  TaggerParams params(shape);
  double *data = params.values().data();
  const auto &blocks = params.blocks();
  auto fill = [&](int first, int last, double fan_in) {
    double bound = 1.0 / std::sqrt(fan_in);
    for (int b = first; b <= last; ++b) {
      FillUniform(data + blocks[b].offset, blocks[b].rows * blocks[b].cols,
                  bound, rng);
    }
  };
  const double cell_fan_in = shape.input_size + shape.hidden_size;
  fill(kForwardInput, kForwardBias, cell_fan_in);
  fill(kBackwardInput, kBackwardBias, cell_fan_in);
  fill(kFeatureWeight, kFeatureBias, 2.0 * shape.hidden_size);
  fill(kOutputWeight, kOutputBias, shape.feature_size);
  if (shape.embedding_rows > 0) {
    auto embeddings = params.Embeddings();
    embeddings.topRows(table.size()) = table.matrix();
    embeddings.row(table.size()) = table.unk_vector().transpose();
  }
  return params;
}

// ---------------------------------------------------------------------------
// Forward and backward passes

ForwardPass RunForward(std::span<const std::string> tokens,
                       const TaggerParams &params, const EmbeddingTable &table) {
  const TaggerShape &shape = params.shape();
  const int n = static_cast<int>(tokens.size());
  const int h = shape.hidden_size;
  const bool lstm = shape.cell == CellType::kLstm;
  const bool trainable = shape.embedding_rows > 0;
  if (shape.input_size != table.dimension()) {
    throw Error("embedding dimension does not match the model");
  }
  if (trainable && shape.embedding_rows != table.size() + 1) {
    throw Error("embedding vocabulary does not match the model");
  }

  ForwardPass pass;
  pass.rows.resize(n);
  pass.inputs.resize(shape.input_size, n);
  for (int t = 0; t < n; ++t) {
    int row = table.Index(tokens[t]);
    pass.rows[t] = row;
    if (trainable) {
      int r = row < 0 ? table.size() : row;
      pass.inputs.col(t) = params.Embeddings().row(r).transpose();
    } else if (row < 0) {
      pass.inputs.col(t) = table.unk_vector();
    } else {
      pass.inputs.col(t) = table.matrix().row(row).transpose();
    }
  }

  for (int dir = 0; dir < 2; ++dir) {
    const auto W = params.CellInput(dir);
    const auto U = params.CellRecurrent(dir);
    const auto b = params.CellBias(dir);
    Eigen::MatrixXd pre = W * pass.inputs;
    pre.colwise() += b;
    pass.gates[dir].resize(shape.gate_count() * h, n);
    pass.hidden[dir].resize(h, n);
    if (lstm) pass.cells[dir].resize(h, n);
    Eigen::VectorXd prev_h = Eigen::VectorXd::Zero(h);
    Eigen::VectorXd prev_c = Eigen::VectorXd::Zero(h);
    for (int step = 0; step < n; ++step) {
      const int t = dir == 0 ? step : n - 1 - step;
      Eigen::VectorXd z = pre.col(t) + U * prev_h;
      if (lstm) {
        Eigen::VectorXd a(4 * h);
        a.segment(0, h) = z.segment(0, h).unaryExpr(&Sigmoid);
        a.segment(h, h) = z.segment(h, h).unaryExpr(&Sigmoid);
        a.segment(2 * h, h) = z.segment(2 * h, h).array().tanh();
        a.segment(3 * h, h) = z.segment(3 * h, h).unaryExpr(&Sigmoid);
        Eigen::VectorXd c = a.segment(h, h).cwiseProduct(prev_c) +
                            a.segment(0, h).cwiseProduct(a.segment(2 * h, h));
        Eigen::VectorXd hidden =
            a.segment(3 * h, h).cwiseProduct(Eigen::VectorXd(c.array().tanh()));
        pass.gates[dir].col(t) = a;
        pass.cells[dir].col(t) = c;
        pass.hidden[dir].col(t) = hidden;
        prev_c = c;
        prev_h = hidden;
      } else {
        Eigen::VectorXd hidden = z.array().tanh();
        pass.gates[dir].col(t) = hidden;
        pass.hidden[dir].col(t) = hidden;
        prev_h = hidden;
      }
    }
  }

  Eigen::MatrixXd states(2 * h, n);
  states.topRows(h) = pass.hidden[0];
  states.bottomRows(h) = pass.hidden[1];
  pass.features = params.FeatureWeight() * states;
  pass.features.colwise() += params.FeatureBias();
  pass.logits = params.OutputWeight() * pass.features;
  pass.logits.colwise() += params.OutputBias();
  pass.probs = Softmax(pass.logits);
  return pass;
}

Eigen::MatrixXd Forward(std::span<const std::string> tokens,
                        const TaggerParams &params, const EmbeddingTable &table) {
  return RunForward(tokens, params, table).probs;
}

void Backpropagate(const ForwardPass &pass, const Eigen::MatrixXd &dlogits,
                   const TaggerParams &params, TaggerParams &grad) {
  const TaggerShape &shape = params.shape();
  const int n = pass.size();
  const int h = shape.hidden_size;
  const bool lstm = shape.cell == CellType::kLstm;
  if (n == 0) return;

  grad.OutputWeight().noalias() += dlogits * pass.features.transpose();
  grad.OutputBias() += dlogits.rowwise().sum();
  Eigen::MatrixXd dfeatures = params.OutputWeight().transpose() * dlogits;

  Eigen::MatrixXd states(2 * h, n);
  states.topRows(h) = pass.hidden[0];
  states.bottomRows(h) = pass.hidden[1];
  grad.FeatureWeight().noalias() += dfeatures * states.transpose();
  grad.FeatureBias() += dfeatures.rowwise().sum();
  Eigen::MatrixXd dstates = params.FeatureWeight().transpose() * dfeatures;

  Eigen::MatrixXd dinputs = Eigen::MatrixXd::Zero(shape.input_size, n);
  for (int dir = 0; dir < 2; ++dir) {
    const auto W = params.CellInput(dir);
    const auto U = params.CellRecurrent(dir);
    auto dW = grad.CellInput(dir);
    auto dU = grad.CellRecurrent(dir);
    auto db = grad.CellBias(dir);
    const Eigen::MatrixXd &gates = pass.gates[dir];
    Eigen::VectorXd dh_next = Eigen::VectorXd::Zero(h);
    Eigen::VectorXd dc_next = Eigen::VectorXd::Zero(h);
    Eigen::MatrixXd dz_all(gates.rows(), n);
    // Walk the direction's time steps backwards.
    for (int step = n - 1; step >= 0; --step) {
      const int t = dir == 0 ? step : n - 1 - step;
      const int prev = dir == 0 ? t - 1 : t + 1;
      const bool has_prev = step > 0;
      Eigen::VectorXd dh = dstates.col(t).segment(dir * h, h) + dh_next;
      Eigen::VectorXd dz(gates.rows());
      if (lstm) {
        auto i = gates.col(t).segment(0, h).array();
        auto f = gates.col(t).segment(h, h).array();
        auto g = gates.col(t).segment(2 * h, h).array();
        auto o = gates.col(t).segment(3 * h, h).array();
        Eigen::ArrayXd tanh_c = pass.cells[dir].col(t).array().tanh();
        Eigen::ArrayXd prev_c = has_prev ? Eigen::ArrayXd(pass.cells[dir].col(prev).array())
                                         : Eigen::ArrayXd::Zero(h);
        Eigen::ArrayXd dc =
            dh.array() * o * (1.0 - tanh_c * tanh_c) + dc_next.array();
        dz.segment(0, h) = (dc * g * i * (1.0 - i)).matrix();
        dz.segment(h, h) = (dc * prev_c * f * (1.0 - f)).matrix();
        dz.segment(2 * h, h) = (dc * i * (1.0 - g * g)).matrix();
        dz.segment(3 * h, h) = (dh.array() * tanh_c * o * (1.0 - o)).matrix();
        dc_next = (dc * f).matrix();
      } else {
        auto a = gates.col(t).array();
        dz = (dh.array() * (1.0 - a * a)).matrix();
      }
      dz_all.col(t) = dz;
      if (has_prev) dU.noalias() += dz * pass.hidden[dir].col(prev).transpose();
      dh_next = U.transpose() * dz;
    }
    dW.noalias() += dz_all * pass.inputs.transpose();
    db += dz_all.rowwise().sum();
    if (shape.embedding_rows > 0) dinputs.noalias() += W.transpose() * dz_all;
  }

  if (shape.embedding_rows > 0) {
    auto dE = grad.Embeddings();
    const int unk_row = shape.embedding_rows - 1;
    for (int t = 0; t < n; ++t) {
      int r = pass.rows[t] < 0 ? unk_row : pass.rows[t];
      dE.row(r) += dinputs.col(t).transpose();
    }
  }
}

// ---------------------------------------------------------------------------
// Losses and training

TrainingItem HardItem(const LabeledSentence &sentence, const TagSet &tags) {
  TrainingItem item;
  item.tokens = sentence.tokens;
  item.kind = TrainingItem::Kind::kHard;
  item.labels = SpansToLabels(sentence, tags);
  return item;
}

std::vector<TrainingItem> HardItems(const Dataset &dataset) {
  std::vector<TrainingItem> items;
  items.reserve(dataset.sentences.size());
  for (const auto &sentence : dataset.sentences) {
    items.push_back(HardItem(sentence, dataset.tag_set));
  }
  return items;
}

double DirectLossAndLogitGradient(const TrainingItem &item,
                                  const Eigen::MatrixXd &probs,
                                  Eigen::MatrixXd &dlogits) {
  dlogits = probs;
  double loss = 0.0;
  const int n = item.size();
  if (item.kind == TrainingItem::Kind::kHard) {
    for (int t = 0; t < n; ++t) {
      int y = item.labels[t];
      loss -= std::log(probs(y, t));
      dlogits(y, t) -= 1.0;
    }
  } else if (item.kind == TrainingItem::Kind::kSoft) {
    for (int t = 0; t < n; ++t) {
      for (Eigen::Index k = 0; k < probs.rows(); ++k) {
        double q = item.soft(k, t);
        if (q != 0.0) loss -= q * std::log(probs(k, t));
      }
    }
    dlogits -= item.soft;
  } else {
    throw Error("channel targets need a target head");
  }
  return loss;
}

namespace {

void CheckItem(const TrainingItem &item, int label_count) {
  const int n = item.size();
  if (item.kind == TrainingItem::Kind::kSoft) {
    if (item.soft.rows() != label_count || item.soft.cols() != n) {
      throw Error("soft target has the wrong shape");
    }
    return;
  }
  if (static_cast<int>(item.labels.size()) != n) {
    throw Error("label count does not match token count");
  }
  for (int y : item.labels) {
    if (y < 0 || y >= label_count) throw Error("label index out of range");
  }
}

double ItemLoss(const TrainingItem &item, const Eigen::MatrixXd &probs,
                double scale, TargetHead *head, Eigen::MatrixXd &dlogits) {
  if (item.kind == TrainingItem::Kind::kChannel) {
    if (head == nullptr) throw Error("channel targets need a target head");
    return head->LossAndLogitGradient(item, probs, scale, dlogits);
  }
  return DirectLossAndLogitGradient(item, probs, dlogits);
}

}  // namespace

LossGradient LossAndGradient(std::span<const TrainingItem> batch,
                             const TaggerParams &params,
                             const EmbeddingTable &table, TargetHead *head) {
  LossGradient out{0.0, TaggerParams(params.shape())};
  std::int64_t tokens = 0;
  for (const auto &item : batch) tokens += item.size();
  if (tokens == 0) throw Error("batch has no tokens");
  const double scale = 1.0 / static_cast<double>(tokens);
  Eigen::MatrixXd dlogits;
  for (const auto &item : batch) {
    if (item.size() == 0) continue;
    CheckItem(item, params.shape().label_count);
    ForwardPass pass = RunForward(item.tokens, params, table);
    out.loss += ItemLoss(item, pass.probs, scale, head, dlogits);
    dlogits *= scale;
    Backpropagate(pass, dlogits, params, out.gradient);
  }
  out.loss *= scale;
  if (!std::isfinite(out.loss)) throw NumericError("non-finite loss");
  return out;
}

std::vector<double> RunEpochs(std::span<const TrainingItem> items, int epochs,
                              double learning_rate, const EmbeddingTable &table,
                              Rng &rng, TaggerParams &params, TargetHead *head) {
  for (const auto &item : items) CheckItem(item, params.shape().label_count);
  std::vector<double> losses;
  std::vector<int> order(items.size());
  TaggerParams grad(params.shape());
  Eigen::MatrixXd dlogits;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    rng.Shuffle(order);
    double total = 0.0;
    std::int64_t tokens = 0;
    for (int index : order) {
      const TrainingItem &item = items[index];
      if (item.size() == 0) continue;
      const double scale = 1.0 / item.size();
      ForwardPass pass = RunForward(item.tokens, params, table);
      double loss = ItemLoss(item, pass.probs, scale, head, dlogits);
      if (!std::isfinite(loss)) {
        throw NumericError("non-finite loss in epoch " + std::to_string(epoch + 1));
      }
      total += loss;
      tokens += item.size();
      dlogits *= scale;
      grad.values().setZero();
      Backpropagate(pass, dlogits, params, grad);
      params.values() -= learning_rate * grad.values();
      if (head != nullptr) head->Step(learning_rate);
      if (!params.AllFinite()) {
        throw NumericError("parameters diverged in epoch " + std::to_string(epoch + 1));
      }
    }
    losses.push_back(tokens == 0 ? 0.0 : total / tokens);
  }
  return losses;
}

TaggerParams TrainItems(std::span<const TrainingItem> items,
                        const TaggerConfig &config, const EmbeddingTable &table,
                        int label_count, TargetHead *head,
                        std::vector<double> *epoch_losses) {
  Rng rng(config.seed);
  TaggerParams params = InitParams(MakeShape(config, table, label_count), table, rng);
  auto losses = RunEpochs(items, config.epochs, config.learning_rate, table, rng,
                          params, head);
  if (epoch_losses != nullptr) *epoch_losses = std::move(losses);
  return params;
}

TaggerParams Train(const Dataset &clean, const TaggerConfig &config,
                   const EmbeddingTable &table) {
  if (clean.TokenCount() == 0) throw Error("no clean training tokens");
  auto items = HardItems(clean);
  return TrainItems(items, config, table, clean.tag_set.label_count());
}

std::vector<int> PredictLabels(std::span<const std::string> tokens,
                               const TaggerParams &params,
                               const EmbeddingTable &table) {
  Eigen::MatrixXd probs = Forward(tokens, params, table);
  std::vector<int> labels(tokens.size());
  for (Eigen::Index t = 0; t < probs.cols(); ++t) {
    int best = 0;
    for (Eigen::Index k = 1; k < probs.rows(); ++k) {
      if (probs(k, t) > probs(best, t)) best = static_cast<int>(k);
    }
    labels[t] = best;
  }
  return labels;
}

Dataset Predict(const Dataset &dataset, const TaggerParams &params,
                const EmbeddingTable &table) {
  if (params.shape().label_count != dataset.tag_set.label_count()) {
    throw SchemaError("model label count does not match the dataset tag set");
  }
  Dataset out = dataset;
  for (auto &sentence : out.sentences) {
    auto labels = PredictLabels(sentence.tokens, params, table);
    sentence.spans = LabelsToSpans(labels, dataset.tag_set);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Checkpoints

void SaveModel(const TaggerModel &model, std::ostream &out) {
  const TaggerShape &shape = model.params.shape();
  out << "wsner-tagger 1\n";
  out << "labels";
  for (int k = 0; k < model.tags.label_count(); ++k) {
    out << ' ' << model.tags.LabelName(k);
  }
  out << '\n';
  out << "cell " << CellTypeName(shape.cell) << '\n';
  out << "input_size " << shape.input_size << '\n';
  out << "hidden_size " << shape.hidden_size << '\n';
  out << "feature_size " << shape.feature_size << '\n';
  out << "embedding_rows " << shape.embedding_rows << '\n';
  char buffer[32];
  const double *data = model.params.values().data();
  for (const auto &block : model.params.blocks()) {
    out << "block " << block.name << ' ' << block.rows << ' ' << block.cols << '\n';
    for (int r = 0; r < block.rows; ++r) {
      for (int c = 0; c < block.cols; ++c) {
        // Column-major storage, written row by row.
        std::snprintf(buffer, sizeof(buffer), "%s%.17g", c == 0 ? "" : " ",
                      data[block.offset + c * block.rows + r]);
        out << buffer;
      }
      out << '\n';
    }
  }
}

void SaveModel(const TaggerModel &model, const std::string &path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  SaveModel(model, out);
  if (!out) throw Error("write failed: " + path);
}

TaggerModel LoadModel(std::istream &in, const std::string &name) {
  int line_number = 0;
  std::string line;
  auto next = [&]() -> std::vector<std::string> {
    if (!std::getline(in, line)) {
      throw ParseError(name, line_number + 1, "unexpected end of checkpoint");
    }
    ++line_number;
    return SplitSpaces(line);
  };
  auto expect_int = [&](const std::string &key) {
    auto fields = next();
    if (fields.size() != 2 || fields[0] != key) {
      throw ParseError(name, line_number, "expected \"" + key + " <int>\"");
    }
    try {
      return std::stoi(fields[1]);
    } catch (const std::exception &) {
      throw ParseError(name, line_number, "bad integer \"" + fields[1] + "\"");
    }
  };

  auto magic = next();
  if (magic.size() != 2 || magic[0] != "wsner-tagger" || magic[1] != "1") {
    throw ParseError(name, line_number, "not a wsner tagger checkpoint");
  }
  auto labels = next();
  if (labels.size() < 2 || labels[0] != "labels" || labels[1] != TagSet::kOutside) {
    throw ParseError(name, line_number, "expected \"labels O <types...>\"");
  }
  TaggerModel model;
  model.tags = TagSet(std::vector<std::string>(labels.begin() + 2, labels.end()));
  auto cell = next();
  if (cell.size() != 2 || cell[0] != "cell") {
    throw ParseError(name, line_number, "expected \"cell <type>\"");
  }
  TaggerShape shape;
  try {
    shape.cell = ParseCellType(cell[1]);
  } catch (const Error &e) {
    throw ParseError(name, line_number, e.what());
  }
  shape.label_count = model.tags.label_count();
  shape.input_size = expect_int("input_size");
  shape.hidden_size = expect_int("hidden_size");
  shape.feature_size = expect_int("feature_size");
  shape.embedding_rows = expect_int("embedding_rows");
  if (shape.input_size < 1 || shape.hidden_size < 1 || shape.feature_size < 1 ||
      shape.embedding_rows < 0) {
    throw ParseError(name, line_number, "invalid model dimensions");
  }
  model.params = TaggerParams(shape);
  double *data = model.params.values().data();
  for (const auto &block : model.params.blocks()) {
    auto header = next();
    if (header.size() != 4 || header[0] != "block" || header[1] != block.name ||
        header[2] != std::to_string(block.rows) ||
        header[3] != std::to_string(block.cols)) {
      throw ParseError(name, line_number,
                       "expected \"block " + block.name + " " +
                           std::to_string(block.rows) + " " +
                           std::to_string(block.cols) + "\"");
    }
    for (int r = 0; r < block.rows; ++r) {
      auto values = next();
      if (static_cast<int>(values.size()) != block.cols) {
        throw ParseError(name, line_number,
                         "expected " + std::to_string(block.cols) + " values");
      }
      for (int c = 0; c < block.cols; ++c) {
        char *end = nullptr;
        double v = std::strtod(values[c].c_str(), &end);
        if (end == values[c].c_str() || *end != '\0' || !std::isfinite(v)) {
          throw ParseError(name, line_number, "bad value \"" + values[c] + "\"");
        }
        data[block.offset + c * block.rows + r] = v;
      }
    }
  }
  return model;
}

TaggerModel LoadModel(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return LoadModel(in, path);
}

}  // namespace wsner
