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

#ifndef WSNER_NOISE_H_
#define WSNER_NOISE_H_

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "wsner/corpus.h"
#include "wsner/random.h"
#include "wsner/tagger.h"

namespace wsner {

// Row-stochastic L x L matrix; entry (t, y) is the probability that clean
// label t is observed as noisy label y.
class ConfusionMatrix {
 public:
  ConfusionMatrix() = default;
  // Throws Error unless every row is non-negative and sums to 1 (1e-9).
  explicit ConfusionMatrix(Eigen::MatrixXd values);

  static ConfusionMatrix Identity(int label_count);

  int label_count() const { return static_cast<int>(values_.rows()); }
  double operator()(int clean, int noisy) const { return values_(clean, noisy); }
  const Eigen::MatrixXd &matrix() const { return values_; }

  bool IsRowStochastic(double tolerance = 1e-9) const;
  // Largest L1 distance between corresponding rows.
  double MaxRowL1(const ConfusionMatrix &other) const;

 private:
  Eigen::MatrixXd values_;
};

// Smoothed counts: (count(t->y) + a) / (count(t->.) + a L). With a = 0 a row
// without observations becomes the identity row. Throws EstimationError for
// empty pairs with a = 0, Error for labels out of range or a < 0.
ConfusionMatrix EstimateConfusion(std::span<const std::pair<int, int>> pairs,
                                  int label_count, double smoothing);

// Distribution over noisy labels: sum_t clean[t] C(t, y).
Eigen::VectorXd NoisyForward(const Eigen::VectorXd &clean_dist,
                             const ConfusionMatrix &channel);

// Header "labels<TAB>O<TAB>PER..." then one tab-separated row per clean label.
void WriteConfusion(const ConfusionMatrix &channel, const TagSet &tags,
                    std::ostream &out);
void WriteConfusion(const ConfusionMatrix &channel, const TagSet &tags,
                    const std::string &path);
std::pair<std::vector<std::string>, ConfusionMatrix> ReadConfusion(
    std::istream &in, const std::string &name = "");
std::pair<std::vector<std::string>, ConfusionMatrix> ReadConfusion(
    const std::string &path);

// Noisy output layer on top of the tagger: channel items are scored by
// -log sum_t p(t|x) C(t, y~). When trainable, C = row-softmax(theta) with
// theta starting at log of the initial rows.
class ChannelHead : public TargetHead {
 public:
  ChannelHead(const ConfusionMatrix &initial, bool trainable);

  double LossAndLogitGradient(const TrainingItem &item,
                              const Eigen::MatrixXd &probs, double scale,
                              Eigen::MatrixXd &dlogits) override;
  void Step(double learning_rate) override;

  const ConfusionMatrix &channel() const { return channel_; }
  bool trainable() const { return trainable_; }
  // Gradient w.r.t. theta accumulated since the last Step.
  const Eigen::MatrixXd &theta_gradient() const { return theta_grad_; }
  const Eigen::MatrixXd &theta() const { return theta_; }

 private:
  void Refresh();

  ConfusionMatrix channel_;
  bool trainable_;
  Eigen::MatrixXd theta_;
  Eigen::MatrixXd theta_grad_;
};

// Loss and logit gradient of one token under a channel: returns
// -log p~(y) and sets dlogits = p - posterior.
double ChannelTokenGradient(const Eigen::VectorXd &probs, int noisy,
                            const ConfusionMatrix &channel,
                            Eigen::VectorXd &dlogits);

enum class ChannelInit { kIdentity, kFromModel };

struct NoiseConfig {
  TaggerConfig tagger;

  // Confusion-matrix method.
  double smoothing = 1.0;
  bool freeze_channel = false;
  // Replaces the estimated initial channel (confusion and EM methods).
  std::optional<ConfusionMatrix> initial_channel;

  // Noise-channel EM.
  int em_iterations = 10;
  int em_warm_start_epochs = 5;
  ChannelInit em_channel_init = ChannelInit::kFromModel;
  bool em_freeze_model = false;
  // Starting tagger instead of a fresh initialization.
  std::optional<TaggerParams> em_initial_params;
  // Mixed mode: clean sentences join every model step with hard targets.
  bool em_include_clean = true;

  // Cleaning network.
  int cleaner_hidden = 32;
  int cleaner_epochs = 30;
  double cleaner_learning_rate = 0.05;
};

// Token pairs (gold label, distant label) of two aligned datasets. Throws
// AlignmentError.
std::vector<std::pair<int, int>> LabelPairs(const Dataset &gold,
                                            const Dataset &distant);

// Tagger trained on clean and distant sentences as if both were gold.
TaggerParams TrainNaiveMix(const Dataset &clean, const Dataset &distant,
                           const TaggerConfig &config, const EmbeddingTable &table);

struct ConfusionResult {
  TaggerParams params;
  ConfusionMatrix initial;
  ConfusionMatrix learned;
};

// Clean sentences use the plain softmax output, distant sentences the
// channel-composed output. The channel starts from (gold, distant) pairs of
// `pair_source` (the clean sentences annotated distantly). With no distant
// sentences this is Train(clean).
ConfusionResult TrainConfusionMethod(const Dataset &clean, const Dataset &distant,
                                     const Dataset &pair_source,
                                     const NoiseConfig &config,
                                     const EmbeddingTable &table);

struct NoiseChannelState {
  ConfusionMatrix channel;
  // Posterior over clean labels per noisy token (n x L), from the last E-step.
  Eigen::MatrixXd posterior;
  // Observed-data log-likelihood at every E-step.
  std::vector<double> log_likelihood;
};

// E-step. `probs` is L x n, `noisy` has n labels. Fills `posterior` (n x L)
// and returns sum_i log sum_t p(t|x_i) C(t, y~_i).
double EStep(const Eigen::MatrixXd &probs, std::span<const int> noisy,
             const ConfusionMatrix &channel, Eigen::MatrixXd &posterior);

// Exact M-step for the channel. Rows without posterior mass keep their
// previous value.
ConfusionMatrix MStep(const Eigen::MatrixXd &posterior, std::span<const int> noisy,
                      const ConfusionMatrix &previous);

// EM over the channel only, model probabilities held fixed.
NoiseChannelState ChannelOnlyEm(const Eigen::MatrixXd &probs,
                                std::span<const int> noisy,
                                const ConfusionMatrix &initial, int iterations);

struct EmResult {
  TaggerParams params;
  NoiseChannelState state;
};

// Noise-channel EM treating the labels of `noisy` as possibly wrong. Each
// iteration runs an E-step over all noisy tokens, the channel M-step, and one
// SGD epoch on the expected cross-entropy. `clean` (may be null) joins the
// model steps with hard targets when config.em_include_clean is set.
EmResult EmNoiseChannel(const Dataset &noisy, const Dataset *clean,
                        const NoiseConfig &config, const EmbeddingTable &table);

// One hidden layer (tanh) network from noisy one-hot ++ tagger features to a
// distribution over clean labels.
class CleaningNetwork {
 public:
  CleaningNetwork() = default;
  CleaningNetwork(int label_count, int feature_size, int hidden_size, Rng &rng);

  Eigen::VectorXd Forward(int noisy, const Eigen::VectorXd &features) const;
  // One SGD step on -log output[gold]; returns the loss.
  double Step(int noisy, const Eigen::VectorXd &features, int gold,
              double learning_rate);

  int label_count() const { return label_count_; }

 private:
  Eigen::VectorXd Input(int noisy, const Eigen::VectorXd &features) const;

  int label_count_ = 0;
  Eigen::MatrixXd hidden_weight_;
  Eigen::VectorXd hidden_bias_;
  Eigen::MatrixXd output_weight_;
  Eigen::VectorXd output_bias_;
};

struct CleaningExample {
  int noisy = 0;
  Eigen::VectorXd features;
  int gold = 0;
};

// Tagger features (feature-layer activations) of every token.
std::vector<Eigen::VectorXd> TokenFeatures(std::span<const std::string> tokens,
                                           const TaggerParams &params,
                                           const EmbeddingTable &table);

CleaningNetwork TrainCleaner(std::span<const CleaningExample> examples,
                             int label_count, int feature_size,
                             const NoiseConfig &config, Rng &rng);

struct CleaningResult {
  TaggerParams params;
  TaggerParams base;  // clean-only tagger that provides the features
  CleaningNetwork cleaner;
};

// Trains a clean-only tagger, fits the cleaner on pairs from `pair_source`,
// turns distant labels into soft targets and retrains the tagger on clean
// plus cleaned data. With no distant sentences this is Train(clean).
CleaningResult TrainCleaningMethod(const Dataset &clean, const Dataset &distant,
                                   const Dataset &pair_source,
                                   const NoiseConfig &config,
                                   const EmbeddingTable &table);

}  // namespace wsner

#endif  // WSNER_NOISE_H_
