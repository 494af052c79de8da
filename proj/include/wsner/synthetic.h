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

#ifndef WSNER_SYNTHETIC_H_
#define WSNER_SYNTHETIC_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "wsner/corpus.h"
#include "wsner/gazetteer.h"
#include "wsner/noise.h"
#include "wsner/random.h"
#include "wsner/tagger.h"

namespace wsner {

// Token classification task with a known answer: every word belongs to one
// label and its vector is the label centroid plus Gaussian noise.
struct SyntheticTaskOptions {
  int words_per_label = 40;
  int dimension = 16;
  double centroid_scale = 1.0;
  double word_noise = 1.0;
  int min_sentence_length = 5;
  int max_sentence_length = 12;
  // Label frequencies, "O" first; uniform when empty.
  std::vector<double> label_weights;
  // Words whose vectors carry a +1 marker in the last dimension (-1
  // otherwise); 0 disables the marker.
  double marked_fraction = 0.0;
  std::uint64_t seed = 1;
};

class SyntheticTask {
 public:
  explicit SyntheticTask(const SyntheticTaskOptions &options,
                         const TagSet &tags = TagSet());

  // Sentences totalling at least `tokens` tokens, gold spans.
  Dataset Generate(std::int64_t tokens, Rng &rng) const;

  const EmbeddingTable &embeddings() const { return embeddings_; }
  const TagSet &tags() const { return tags_; }
  // Gold label of a vocabulary word.
  int LabelOf(const std::string &word) const;
  bool IsMarked(const std::string &word) const;

 private:
  SyntheticTaskOptions options_;
  TagSet tags_;
  std::vector<std::vector<std::string>> words_;  // per label
  std::vector<std::string> marked_;
  EmbeddingTable embeddings_;
};

// Per-token label corruption. Each returns a copy with distant provenance.
// Replaces each label with probability `rate` by a different label drawn
// uniformly.
Dataset ApplyUniformNoise(const Dataset &gold, double rate, Rng &rng);
// Draws each noisy label from row gold-label of `channel`.
Dataset ApplyChannelNoise(const Dataset &gold, const ConfusionMatrix &channel,
                          Rng &rng);
// Applies `channel` only to tokens for which `affected` holds.
Dataset ApplyConditionalNoise(const Dataset &gold, const ConfusionMatrix &channel,
                              const std::function<bool(const std::string &)> &affected,
                              Rng &rng);

// Fraction of tokens whose predicted label equals the gold label.
double TokenAccuracy(const Dataset &gold, const TaggerParams &params,
                     const EmbeddingTable &table);

// A small synthetic corpus in a Yoruba-like orthography, with entity lists,
// date keywords and word vectors, for exercising the whole pipeline.
struct PipelineCorpusOptions {
  std::int64_t train_tokens = 6000;
  std::int64_t test_tokens = 2000;
  std::int64_t extra_tokens = 2500;
  int dimension = 16;
  std::uint64_t seed = 2020;
};

struct PipelineCorpus {
  Dataset train;
  Dataset test;
  Dataset extra;  // extra raw text; its gold spans are only kept for reference
  std::vector<GazetteerEntry> wikidata;       // source "wikidata"
  std::vector<GazetteerEntry> nigerian_names; // source "nigerian-names"
  std::vector<std::string> keywords;
  EmbeddingTable embeddings;
};

PipelineCorpus MakePipelineCorpus(const PipelineCorpusOptions &options);

// Writes train.conll, test.conll, extra.conll, wikidata.tsv,
// nigerian_names.tsv, date_keywords.txt, vectors.txt and experiment.json
// into `directory` (created if needed).
void WritePipelineCorpus(const PipelineCorpus &corpus, const std::string &directory);

}  // namespace wsner

#endif  // WSNER_SYNTHETIC_H_
