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

#ifndef WSNER_TAGGER_H_
#define WSNER_TAGGER_H_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "wsner/corpus.h"
#include "wsner/random.h"

namespace wsner {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Pretrained word vectors. Tokens not in the vocabulary map to the mean of
// all rows.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;

  // `vectors` has one row per word. Later duplicates of a word are ignored.
  EmbeddingTable(const std::vector<std::string> &words, const RowMatrix &vectors);

  // Word-vector text format: "<count> <dim>" header, then one
  // "word v1 ... vd" line per word. Throws ParseError.
  static EmbeddingTable Load(const std::string &path);
  static EmbeddingTable Parse(std::istream &in, const std::string &name = "");

  void Save(const std::string &path) const;

  int size() const { return static_cast<int>(words_.size()); }
  int dimension() const { return static_cast<int>(matrix_.cols()); }

  // Row index of `token`, or -1.
  int Index(std::string_view token) const;
  // Row for `token`, or the unknown-word vector.
  Eigen::VectorXd Lookup(std::string_view token) const;

  const RowMatrix &matrix() const { return matrix_; }
  const Eigen::VectorXd &unk_vector() const { return unk_; }
  const std::vector<std::string> &words() const { return words_; }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, int> index_;
  RowMatrix matrix_;
  Eigen::VectorXd unk_;
};

enum class CellType { kLstm, kRnn };

std::string_view CellTypeName(CellType cell);
CellType ParseCellType(std::string_view name);

struct TaggerConfig {
  int hidden_size = 300;
  int feature_size = 128;
  double learning_rate = 0.01;
  int epochs = 10;
  std::uint64_t seed = 1;
  bool fine_tune_embeddings = false;
  CellType cell = CellType::kLstm;

  // Throws Error on non-positive sizes, rates or epochs.
  void Validate() const;
};

struct TaggerShape {
  int input_size = 0;
  int hidden_size = 0;
  int feature_size = 0;
  int label_count = 0;
  CellType cell = CellType::kLstm;
  // Trainable embedding rows (vocabulary + unknown row); 0 when frozen.
  int embedding_rows = 0;

  int gate_count() const { return cell == CellType::kLstm ? 4 : 1; }
  bool operator==(const TaggerShape &other) const = default;
};

// All trainable parameters in one flat vector, with matrix views per block.
// Gradients use the same type.
class TaggerParams {
 public:
  using MatrixView = Eigen::Map<Eigen::MatrixXd>;
  using ConstMatrixView = Eigen::Map<const Eigen::MatrixXd>;
  using VectorView = Eigen::Map<Eigen::VectorXd>;
  using ConstVectorView = Eigen::Map<const Eigen::VectorXd>;
  using EmbeddingView = Eigen::Map<RowMatrix>;
  using ConstEmbeddingView = Eigen::Map<const RowMatrix>;

  struct Block {
    std::string name;
    int rows;
    int cols;
    int offset;
  };

  TaggerParams() = default;
  // Zero-initialized.
  explicit TaggerParams(const TaggerShape &shape);

  const TaggerShape &shape() const { return shape_; }
  int size() const { return static_cast<int>(values_.size()); }
  Eigen::VectorXd &values() { return values_; }
  const Eigen::VectorXd &values() const { return values_; }
  const std::vector<Block> &blocks() const { return blocks_; }

  // direction 0 = left-to-right, 1 = right-to-left.
  MatrixView CellInput(int direction);
  MatrixView CellRecurrent(int direction);
  VectorView CellBias(int direction);
  MatrixView FeatureWeight();
  VectorView FeatureBias();
  MatrixView OutputWeight();
  VectorView OutputBias();
  EmbeddingView Embeddings();

  ConstMatrixView CellInput(int direction) const;
  ConstMatrixView CellRecurrent(int direction) const;
  ConstVectorView CellBias(int direction) const;
  ConstMatrixView FeatureWeight() const;
  ConstVectorView FeatureBias() const;
  ConstMatrixView OutputWeight() const;
  ConstVectorView OutputBias() const;
  ConstEmbeddingView Embeddings() const;

  bool AllFinite() const { return values_.allFinite(); }
  bool operator==(const TaggerParams &other) const {
    return shape_ == other.shape_ && values_ == other.values_;
  }

 private:
  const Block &Find(int index) const { return blocks_[index]; }

  TaggerShape shape_;
  std::vector<Block> blocks_;
  Eigen::VectorXd values_;
};

TaggerShape MakeShape(const TaggerConfig &config, const EmbeddingTable &table,
                      int label_count);

// Uniform in +-1/sqrt(fan_in) per layer. Trainable embeddings start as a copy
// of the table (unknown row last).
TaggerParams InitParams(const TaggerShape &shape, const EmbeddingTable &table,
                        Rng &rng);

// Activations of one sentence, kept for backpropagation. Columns are tokens.
struct ForwardPass {
  std::vector<int> rows;  // embedding row per token, -1 for unknown
  Eigen::MatrixXd inputs;
  Eigen::MatrixXd gates[2];   // post-activation gate values per direction
  Eigen::MatrixXd cells[2];   // LSTM memory cells (empty for RNN)
  Eigen::MatrixXd hidden[2];
  Eigen::MatrixXd features;
  Eigen::MatrixXd logits;
  Eigen::MatrixXd probs;

  int size() const { return static_cast<int>(rows.size()); }
};

ForwardPass RunForward(std::span<const std::string> tokens,
                       const TaggerParams &params, const EmbeddingTable &table);

// Per-token label distributions, L x n.
Eigen::MatrixXd Forward(std::span<const std::string> tokens,
                        const TaggerParams &params, const EmbeddingTable &table);

// Accumulates into `grad` the gradient of a loss whose derivative with
// respect to the logits is `dlogits` (L x n).
void Backpropagate(const ForwardPass &pass, const Eigen::MatrixXd &dlogits,
                   const TaggerParams &params, TaggerParams &grad);

// Training target for one sentence.
struct TrainingItem {
  enum class Kind { kHard, kSoft, kChannel };

  std::vector<std::string> tokens;
  Kind kind = Kind::kHard;
  // Label per token for kHard; observed noisy label for kChannel.
  std::vector<int> labels;
  // L x n target distributions for kSoft.
  Eigen::MatrixXd soft;

  int size() const { return static_cast<int>(tokens.size()); }
};

TrainingItem HardItem(const LabeledSentence &sentence, const TagSet &tags);
std::vector<TrainingItem> HardItems(const Dataset &dataset);

// Loss for items whose labels are observed through a noise channel.
class TargetHead {
 public:
  virtual ~TargetHead() = default;

  // Returns the summed per-token loss of `item` given model probabilities
  // (L x n) and writes its derivative w.r.t. the logits. May accumulate
  // gradients of the head's own parameters, scaled by `scale`.
  virtual double LossAndLogitGradient(const TrainingItem &item,
                                      const Eigen::MatrixXd &probs,
                                      double scale, Eigen::MatrixXd &dlogits) = 0;

  // Applies and clears accumulated head gradients.
  virtual void Step(double learning_rate) = 0;
};

// Summed cross-entropy of hard or soft targets and its logit gradient.
double DirectLossAndLogitGradient(const TrainingItem &item,
                                  const Eigen::MatrixXd &probs,
                                  Eigen::MatrixXd &dlogits);

struct LossGradient {
  double loss = 0.0;  // mean per-token cross-entropy
  TaggerParams gradient;
};

// Mean per-token cross-entropy over the batch and its gradient. Channel
// items need `head`. Throws NumericError on a non-finite loss.
LossGradient LossAndGradient(std::span<const TrainingItem> batch,
                             const TaggerParams &params,
                             const EmbeddingTable &table,
                             TargetHead *head = nullptr);

// Per-sentence SGD in a freshly shuffled order each epoch, continuing from
// `params`. The gradient of each step is the sentence's mean token loss.
// Returns the mean per-token loss of every epoch. Throws NumericError when
// the loss or the parameters stop being finite.
std::vector<double> RunEpochs(std::span<const TrainingItem> items, int epochs,
                              double learning_rate, const EmbeddingTable &table,
                              Rng &rng, TaggerParams &params,
                              TargetHead *head = nullptr);

// Seeds a generator from config.seed, initializes parameters and runs
// config.epochs epochs over `items`.
TaggerParams TrainItems(std::span<const TrainingItem> items,
                        const TaggerConfig &config, const EmbeddingTable &table,
                        int label_count, TargetHead *head = nullptr,
                        std::vector<double> *epoch_losses = nullptr);

// Supervised training on gold spans (IO labels). Throws Error when `clean`
// has no tokens.
TaggerParams Train(const Dataset &clean, const TaggerConfig &config,
                   const EmbeddingTable &table);

// Argmax label per token, lowest index on ties.
std::vector<int> PredictLabels(std::span<const std::string> tokens,
                               const TaggerParams &params,
                               const EmbeddingTable &table);

// Replaces spans by the decoded predictions; provenance is kept.
Dataset Predict(const Dataset &dataset, const TaggerParams &params,
                const EmbeddingTable &table);

struct TaggerModel {
  TagSet tags;
  TaggerParams params;
};

// Text checkpoint; see README for the layout.
void SaveModel(const TaggerModel &model, std::ostream &out);
void SaveModel(const TaggerModel &model, const std::string &path);
TaggerModel LoadModel(std::istream &in, const std::string &name = "");
TaggerModel LoadModel(const std::string &path);

}  // namespace wsner

#endif  // WSNER_TAGGER_H_
