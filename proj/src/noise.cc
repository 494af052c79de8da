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

#include "wsner/noise.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

#include "wsner/errors.h"
#include "wsner/text.h"

namespace wsner {

// ---------------------------------------------------------------------------
// ConfusionMatrix

ConfusionMatrix::ConfusionMatrix(Eigen::MatrixXd values)
    : values_(std::move(values)) {
  if (values_.rows() != values_.cols() || values_.rows() == 0) {
    throw Error("confusion matrix must be square and non-empty");
  }
  if (!IsRowStochastic()) throw Error("confusion matrix is not row-stochastic");
}

ConfusionMatrix ConfusionMatrix::Identity(int label_count) {
  return ConfusionMatrix(Eigen::MatrixXd::Identity(label_count, label_count));
}

bool ConfusionMatrix::IsRowStochastic(double tolerance) const {
  if (!values_.allFinite() || (values_.array() < 0.0).any()) return false;
  for (Eigen::Index r = 0; r < values_.rows(); ++r) {
    if (std::abs(values_.row(r).sum() - 1.0) > tolerance) return false;
  }
  return true;
}

double ConfusionMatrix::MaxRowL1(const ConfusionMatrix &other) const {
  if (other.label_count() != label_count()) throw Error("label counts differ");
  return (values_ - other.values_).cwiseAbs().rowwise().sum().maxCoeff();
}

ConfusionMatrix EstimateConfusion(std::span<const std::pair<int, int>> pairs,
                                  int label_count, double smoothing) {
  if (label_count < 1) throw Error("label count must be positive");
  if (!(smoothing >= 0.0)) throw Error("smoothing must be non-negative");
  if (pairs.empty() && smoothing == 0.0) {
    throw EstimationError("no label pairs to estimate a confusion matrix from");
  }
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(label_count, label_count);
  for (const auto &[clean, noisy] : pairs) {
    if (clean < 0 || clean >= label_count || noisy < 0 || noisy >= label_count) {
      throw Error("label index out of range");
    }
    counts(clean, noisy) += 1.0;
  }
  Eigen::MatrixXd values(label_count, label_count);
  for (int t = 0; t < label_count; ++t) {
    double total = counts.row(t).sum();
    if (total == 0.0 && smoothing == 0.0) {
      values.row(t).setZero();
      values(t, t) = 1.0;
      continue;
    }
    values.row(t) = (counts.row(t).array() + smoothing) /
                    (total + smoothing * label_count);
  }
  return ConfusionMatrix(std::move(values));
}

Eigen::VectorXd NoisyForward(const Eigen::VectorXd &clean_dist,
                             const ConfusionMatrix &channel) {
  if (clean_dist.size() != channel.label_count()) {
    throw Error("distribution size does not match the channel");
  }
  return channel.matrix().transpose() * clean_dist;
}

void WriteConfusion(const ConfusionMatrix &channel, const TagSet &tags,
                    std::ostream &out) {
  if (channel.label_count() != tags.label_count()) {
    throw SchemaError("channel size does not match the tag set");
  }
  out << "labels";
  for (int k = 0; k < tags.label_count(); ++k) out << '\t' << tags.LabelName(k);
  out << '\n';
  char buffer[32];
  for (int t = 0; t < channel.label_count(); ++t) {
    for (int y = 0; y < channel.label_count(); ++y) {
      std::snprintf(buffer, sizeof(buffer), "%.17g", channel(t, y));
      out << (y == 0 ? "" : "\t") << buffer;
    }
    out << '\n';
  }
}

void WriteConfusion(const ConfusionMatrix &channel, const TagSet &tags,
                    const std::string &path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  WriteConfusion(channel, tags, out);
}

std::pair<std::vector<std::string>, ConfusionMatrix> ReadConfusion(
    std::istream &in, const std::string &name) {
  std::string line;
  int line_number = 0;
  if (!std::getline(in, line)) throw ParseError(name, 1, "missing header");
  ++line_number;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto header = Split(line, '\t');
  if (header.size() < 2 || header[0] != "labels") {
    throw ParseError(name, 1, "expected \"labels<TAB>...\" header");
  }
  std::vector<std::string> labels(header.begin() + 1, header.end());
  const int n = static_cast<int>(labels.size());
  Eigen::MatrixXd values(n, n);
  for (int t = 0; t < n; ++t) {
    if (!std::getline(in, line)) {
      throw ParseError(name, line_number + 1, "missing matrix row");
    }
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto fields = Split(line, '\t');
    if (static_cast<int>(fields.size()) != n) {
      throw ParseError(name, line_number, "expected " + std::to_string(n) + " values");
    }
    for (int y = 0; y < n; ++y) {
      char *end = nullptr;
      values(t, y) = std::strtod(fields[y].c_str(), &end);
      if (end == fields[y].c_str() || *end != '\0') {
        throw ParseError(name, line_number, "bad value \"" + fields[y] + "\"");
      }
    }
  }
  try {
    return {labels, ConfusionMatrix(values)};
  } catch (const Error &e) {
    throw ParseError(name, line_number, e.what());
  }
}

std::pair<std::vector<std::string>, ConfusionMatrix> ReadConfusion(
    const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return ReadConfusion(in, path);
}

// ---------------------------------------------------------------------------
// Channel head

double ChannelTokenGradient(const Eigen::VectorXd &probs, int noisy,
                            const ConfusionMatrix &channel,
                            Eigen::VectorXd &dlogits) {
  const int L = channel.label_count();
  Eigen::VectorXd joint(L);
  for (int t = 0; t < L; ++t) joint(t) = probs(t) * channel(t, noisy);
  double noisy_prob = joint.sum();
  dlogits.resize(L);
  for (int t = 0; t < L; ++t) dlogits(t) = probs(t) - joint(t) / noisy_prob;
  return -std::log(noisy_prob);
}

ChannelHead::ChannelHead(const ConfusionMatrix &initial, bool trainable)
    : channel_(initial), trainable_(trainable) {
  const int L = initial.label_count();
  theta_ = initial.matrix().array().max(1e-12).log().matrix();
  theta_grad_ = Eigen::MatrixXd::Zero(L, L);
  if (trainable_) Refresh();
}

void ChannelHead::Refresh() {
  Eigen::MatrixXd values(theta_.rows(), theta_.cols());
  for (Eigen::Index t = 0; t < theta_.rows(); ++t) {
    Eigen::ArrayXd e = (theta_.row(t).array() - theta_.row(t).maxCoeff()).exp();
    values.row(t) = (e / e.sum()).matrix().transpose();
  }
  channel_ = ConfusionMatrix(std::move(values));
}

double ChannelHead::LossAndLogitGradient(const TrainingItem &item,
                                         const Eigen::MatrixXd &probs,
                                         double scale, Eigen::MatrixXd &dlogits) {
  const int L = channel_.label_count();
  if (probs.rows() != L) throw Error("channel size does not match the tagger");
  dlogits.resize(probs.rows(), probs.cols());
  double loss = 0.0;
  Eigen::VectorXd column;
  for (int t = 0; t < item.size(); ++t) {
    const int y = item.labels[t];
    Eigen::VectorXd p = probs.col(t);
    loss += ChannelTokenGradient(p, y, channel_, column);
    dlogits.col(t) = column;
    if (!trainable_) continue;
    // d(-log p~y)/dC(s, y) = -p(s) / p~y; back through the row softmax.
    double noisy_prob = 0.0;
    for (int s = 0; s < L; ++s) noisy_prob += p(s) * channel_(s, y);
    for (int s = 0; s < L; ++s) {
      double g = -p(s) / noisy_prob;
      for (int j = 0; j < L; ++j) {
        double delta = j == y ? 1.0 : 0.0;
        theta_grad_(s, j) += scale * channel_(s, j) * (delta - channel_(s, y)) * g;
      }
    }
  }
  return loss;
}

void ChannelHead::Step(double learning_rate) {
  if (!trainable_) return;
  theta_ -= learning_rate * theta_grad_;
  theta_grad_.setZero();
  if (!theta_.allFinite()) throw NumericError("channel parameters diverged");
  Refresh();
}

// ---------------------------------------------------------------------------
// Confusion-matrix method

std::vector<std::pair<int, int>> LabelPairs(const Dataset &gold,
                                            const Dataset &distant) {
  if (gold.sentences.size() != distant.sentences.size()) {
    throw AlignmentError(0, "pair datasets have different sentence counts");
  }
  std::vector<std::pair<int, int>> pairs;
  for (size_t s = 0; s < gold.sentences.size(); ++s) {
    if (gold.sentences[s].tokens != distant.sentences[s].tokens) {
      throw AlignmentError(static_cast<int>(s), "tokens differ");
    }
    auto g = SpansToLabels(gold.sentences[s], gold.tag_set);
    auto d = SpansToLabels(distant.sentences[s], gold.tag_set);
    for (size_t t = 0; t < g.size(); ++t) pairs.emplace_back(g[t], d[t]);
  }
  return pairs;
}

TaggerParams TrainNaiveMix(const Dataset &clean, const Dataset &distant,
                           const TaggerConfig &config, const EmbeddingTable &table) {
  if (clean.TokenCount() + distant.TokenCount() == 0) {
    throw Error("no training tokens");
  }
  auto items = HardItems(clean);
  auto more = HardItems(distant);
  items.insert(items.end(), more.begin(), more.end());
  return TrainItems(items, config, table, clean.tag_set.label_count());
}

ConfusionResult TrainConfusionMethod(const Dataset &clean, const Dataset &distant,
                                     const Dataset &pair_source,
                                     const NoiseConfig &config,
                                     const EmbeddingTable &table) {
  const int L = clean.tag_set.label_count();
  ConfusionMatrix initial;
  if (config.initial_channel) {
    initial = *config.initial_channel;
    if (initial.label_count() != L) throw Error("initial channel has the wrong size");
  } else {
    auto pairs = LabelPairs(clean, pair_source);
    initial = EstimateConfusion(pairs, L, config.smoothing);
  }
  if (distant.TokenCount() == 0) {
    return {Train(clean, config.tagger, table), initial, initial};
  }

  auto items = HardItems(clean);
  for (const auto &sentence : distant.sentences) {
    TrainingItem item = HardItem(sentence, clean.tag_set);
    item.kind = TrainingItem::Kind::kChannel;
    items.push_back(std::move(item));
  }
  ChannelHead head(initial, !config.freeze_channel);
  TaggerParams params = TrainItems(items, config.tagger, table, L, &head);
  return {std::move(params), initial, head.channel()};
}

// ---------------------------------------------------------------------------
// Noise-channel EM

double EStep(const Eigen::MatrixXd &probs, std::span<const int> noisy,
             const ConfusionMatrix &channel, Eigen::MatrixXd &posterior) {
  const int L = channel.label_count();
  const Eigen::Index n = probs.cols();
  if (probs.rows() != L || static_cast<Eigen::Index>(noisy.size()) != n) {
    throw Error("E-step inputs have inconsistent shapes");
  }
  posterior.resize(n, L);
  double log_likelihood = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int y = noisy[i];
    double total = 0.0;
    for (int t = 0; t < L; ++t) {
      posterior(i, t) = probs(t, i) * channel(t, y);
      total += posterior(i, t);
    }
    if (!(total > 0.0)) throw NumericError("noisy label has zero likelihood");
    posterior.row(i) /= total;
    log_likelihood += std::log(total);
  }
  return log_likelihood;
}

ConfusionMatrix MStep(const Eigen::MatrixXd &posterior, std::span<const int> noisy,
                      const ConfusionMatrix &previous) {
  const int L = previous.label_count();
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(L, L);
  for (Eigen::Index i = 0; i < posterior.rows(); ++i) {
    counts.col(noisy[i]) += posterior.row(i).transpose();
  }
  Eigen::MatrixXd values(L, L);
  for (int t = 0; t < L; ++t) {
    double total = counts.row(t).sum();
    if (total > 0.0) {
      values.row(t) = counts.row(t) / total;
    } else {
      values.row(t) = previous.matrix().row(t);
    }
  }
  return ConfusionMatrix(std::move(values));
}

NoiseChannelState ChannelOnlyEm(const Eigen::MatrixXd &probs,
                                std::span<const int> noisy,
                                const ConfusionMatrix &initial, int iterations) {
  NoiseChannelState state;
  state.channel = initial;
  for (int it = 0; it < iterations; ++it) {
    state.log_likelihood.push_back(
        EStep(probs, noisy, state.channel, state.posterior));
    state.channel = MStep(state.posterior, noisy, state.channel);
  }
  return state;
}

namespace {

struct NoisyTokens {
  Eigen::MatrixXd probs;      // L x N
  std::vector<int> labels;    // N
  std::vector<int> offsets;   // first token of each sentence
};

NoisyTokens CollectNoisy(const std::vector<TrainingItem> &items,
                         const TaggerParams &params, const EmbeddingTable &table) {
  NoisyTokens out;
  int total = 0;
  for (const auto &item : items) {
    out.offsets.push_back(total);
    total += item.size();
  }
  out.probs.resize(params.shape().label_count, total);
  for (size_t s = 0; s < items.size(); ++s) {
    if (items[s].size() == 0) continue;
    out.probs.middleCols(out.offsets[s], items[s].size()) =
        Forward(items[s].tokens, params, table);
    out.labels.insert(out.labels.end(), items[s].labels.begin(), items[s].labels.end());
  }
  return out;
}

}  // namespace

EmResult EmNoiseChannel(const Dataset &noisy, const Dataset *clean,
                        const NoiseConfig &config, const EmbeddingTable &table) {
  if (noisy.TokenCount() == 0) throw Error("no noisy training tokens");
  if (config.em_iterations < 1) throw Error("em_iterations must be positive");
  const int L = noisy.tag_set.label_count();
  const TaggerConfig &tc = config.tagger;

  std::vector<TrainingItem> noisy_items = HardItems(noisy);
  std::vector<TrainingItem> clean_items;
  if (clean != nullptr && config.em_include_clean) clean_items = HardItems(*clean);

  Rng rng(tc.seed);
  EmResult result;
  result.params = InitParams(MakeShape(tc, table, L), table, rng);
  if (config.em_initial_params) {
    if (!(config.em_initial_params->shape() == result.params.shape())) {
      throw Error("initial tagger parameters have the wrong shape");
    }
    result.params = *config.em_initial_params;
  }

  if (config.em_warm_start_epochs > 0) {
    std::vector<TrainingItem> warm = clean_items;
    warm.insert(warm.end(), noisy_items.begin(), noisy_items.end());
    RunEpochs(warm, config.em_warm_start_epochs, tc.learning_rate, table, rng,
              result.params);
  }

  ConfusionMatrix channel;
  if (config.initial_channel) {
    channel = *config.initial_channel;
  } else if (config.em_channel_init == ChannelInit::kIdentity) {
    channel = ConfusionMatrix::Identity(L);
  } else {
    NoisyTokens tokens = CollectNoisy(noisy_items, result.params, table);
    std::vector<std::pair<int, int>> pairs;
    for (Eigen::Index i = 0; i < tokens.probs.cols(); ++i) {
      Eigen::Index best;
      tokens.probs.col(i).maxCoeff(&best);
      pairs.emplace_back(static_cast<int>(best), tokens.labels[i]);
    }
    channel = EstimateConfusion(pairs, L, config.smoothing);
  }
  if (channel.label_count() != L) throw Error("initial channel has the wrong size");

  NoiseChannelState &state = result.state;
  state.channel = channel;
  for (int it = 0; it < config.em_iterations; ++it) {
    NoisyTokens tokens = CollectNoisy(noisy_items, result.params, table);
    state.log_likelihood.push_back(
        EStep(tokens.probs, tokens.labels, state.channel, state.posterior));
    if (!config.freeze_channel) {
      state.channel = MStep(state.posterior, tokens.labels, state.channel);
    }
    if (config.em_freeze_model) continue;

    std::vector<TrainingItem> items = clean_items;
    for (size_t s = 0; s < noisy_items.size(); ++s) {
      TrainingItem item;
      item.tokens = noisy_items[s].tokens;
      item.kind = TrainingItem::Kind::kSoft;
      item.soft = state.posterior
                      .middleRows(tokens.offsets[s], noisy_items[s].size())
                      .transpose();
      items.push_back(std::move(item));
    }
    RunEpochs(items, 1, tc.learning_rate, table, rng, result.params);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Cleaning network

CleaningNetwork::CleaningNetwork(int label_count, int feature_size,
                                 int hidden_size, Rng &rng)
    : label_count_(label_count) {
  const int input = label_count + feature_size;
  hidden_weight_.resize(hidden_size, input);
  hidden_bias_.resize(hidden_size);
  output_weight_.resize(label_count, hidden_size);
  output_bias_.resize(label_count);
  double bound = 1.0 / std::sqrt(static_cast<double>(input));
  for (double &v : hidden_weight_.reshaped()) v = rng.Uniform(-bound, bound);
  for (double &v : hidden_bias_) v = rng.Uniform(-bound, bound);
  bound = 1.0 / std::sqrt(static_cast<double>(hidden_size));
  for (double &v : output_weight_.reshaped()) v = rng.Uniform(-bound, bound);
  for (double &v : output_bias_) v = rng.Uniform(-bound, bound);
}

Eigen::VectorXd CleaningNetwork::Input(int noisy,
                                       const Eigen::VectorXd &features) const {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(label_count_ + features.size());
  x(noisy) = 1.0;
  x.tail(features.size()) = features;
  return x;
}

Eigen::VectorXd CleaningNetwork::Forward(int noisy,
                                         const Eigen::VectorXd &features) const {
  Eigen::VectorXd hidden =
      (hidden_weight_ * Input(noisy, features) + hidden_bias_).array().tanh();
  Eigen::VectorXd logits = output_weight_ * hidden + output_bias_;
  Eigen::ArrayXd e = (logits.array() - logits.maxCoeff()).exp();
  return e / e.sum();
}

double CleaningNetwork::Step(int noisy, const Eigen::VectorXd &features, int gold,
                             double learning_rate) {
  Eigen::VectorXd x = Input(noisy, features);
  Eigen::VectorXd hidden = (hidden_weight_ * x + hidden_bias_).array().tanh();
  Eigen::VectorXd logits = output_weight_ * hidden + output_bias_;
  Eigen::ArrayXd e = (logits.array() - logits.maxCoeff()).exp();
  Eigen::VectorXd probs = e / e.sum();
  double loss = -std::log(probs(gold));

  Eigen::VectorXd dlogits = probs;
  dlogits(gold) -= 1.0;
  Eigen::VectorXd dhidden = output_weight_.transpose() * dlogits;
  Eigen::VectorXd dpre = dhidden.array() * (1.0 - hidden.array().square());
  output_weight_ -= learning_rate * dlogits * hidden.transpose();
  output_bias_ -= learning_rate * dlogits;
  hidden_weight_ -= learning_rate * dpre * x.transpose();
  hidden_bias_ -= learning_rate * dpre;
  if (!std::isfinite(loss) || !hidden_weight_.allFinite()) {
    throw NumericError("cleaning network diverged");
  }
  return loss;
}

std::vector<Eigen::VectorXd> TokenFeatures(std::span<const std::string> tokens,
                                           const TaggerParams &params,
                                           const EmbeddingTable &table) {
  ForwardPass pass = RunForward(tokens, params, table);
  std::vector<Eigen::VectorXd> out;
  for (int t = 0; t < pass.size(); ++t) out.push_back(pass.features.col(t));
  return out;
}

CleaningNetwork TrainCleaner(std::span<const CleaningExample> examples,
                             int label_count, int feature_size,
                             const NoiseConfig &config, Rng &rng) {
  CleaningNetwork net(label_count, feature_size, config.cleaner_hidden, rng);
  std::vector<int> order(examples.size());
  for (int epoch = 0; epoch < config.cleaner_epochs; ++epoch) {
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    rng.Shuffle(order);
    for (int i : order) {
      net.Step(examples[i].noisy, examples[i].features, examples[i].gold,
               config.cleaner_learning_rate);
    }
  }
  return net;
}

CleaningResult TrainCleaningMethod(const Dataset &clean, const Dataset &distant,
                                   const Dataset &pair_source,
                                   const NoiseConfig &config,
                                   const EmbeddingTable &table) {
  const TagSet &tags = clean.tag_set;
  const int L = tags.label_count();
  CleaningResult result;
  result.base = Train(clean, config.tagger, table);
  if (distant.TokenCount() == 0) {
    result.params = result.base;
    return result;
  }

  if (clean.sentences.size() != pair_source.sentences.size()) {
    throw AlignmentError(0, "pair datasets have different sentence counts");
  }
  std::vector<CleaningExample> examples;
  for (size_t s = 0; s < clean.sentences.size(); ++s) {
    const auto &gold_sentence = clean.sentences[s];
    if (gold_sentence.tokens != pair_source.sentences[s].tokens) {
      throw AlignmentError(static_cast<int>(s), "tokens differ");
    }
    auto gold = SpansToLabels(gold_sentence, tags);
    auto noisy = SpansToLabels(pair_source.sentences[s], tags);
    auto features = TokenFeatures(gold_sentence.tokens, result.base, table);
    for (size_t t = 0; t < gold.size(); ++t) {
      examples.push_back({noisy[t], std::move(features[t]), gold[t]});
    }
  }
  Rng rng(config.tagger.seed ^ 0x9e3779b97f4a7c15ULL);
  result.cleaner = TrainCleaner(examples, L, config.tagger.feature_size, config, rng);

  std::vector<TrainingItem> items = HardItems(clean);
  for (const auto &sentence : distant.sentences) {
    TrainingItem item;
    item.tokens = sentence.tokens;
    item.kind = TrainingItem::Kind::kSoft;
    item.soft.resize(L, sentence.size());
    auto noisy = SpansToLabels(sentence, tags);
    auto features = TokenFeatures(sentence.tokens, result.base, table);
    for (int t = 0; t < sentence.size(); ++t) {
      item.soft.col(t) = result.cleaner.Forward(noisy[t], features[t]);
    }
    items.push_back(std::move(item));
  }
  result.params = TrainItems(items, config.tagger, table, L);
  return result;
}

}  // namespace wsner
