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

#include "wsner/synthetic.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include "json.hpp"
#include "wsner/errors.h"
#include "wsner/ingest.h"
#include "wsner/text.h"

namespace wsner {

// ---------------------------------------------------------------------------
// Token classification task

SyntheticTask::SyntheticTask(const SyntheticTaskOptions &options,
                             const TagSet &tags)
    : options_(options), tags_(tags) {
  const int L = tags_.label_count();
  const int d = options.dimension;
  if (options.words_per_label < 1 || d < 1) throw Error("bad synthetic task size");
  if (!options.label_weights.empty() &&
      static_cast<int>(options.label_weights.size()) != L) {
    throw Error("label_weights needs one weight per label");
  }
  Rng rng(options.seed);
  const bool marker = options.marked_fraction > 0.0;
  const int free_dims = marker ? d - 1 : d;
  if (free_dims < 1) throw Error("dimension too small for the marker");

  Eigen::MatrixXd centroids(L, free_dims);
  for (int k = 0; k < L; ++k) {
    for (int j = 0; j < free_dims; ++j) centroids(k, j) = rng.Normal();
  }
  centroids *= options.centroid_scale;

  std::vector<std::string> vocab;
  RowMatrix vectors(L * options.words_per_label, d);
  words_.resize(L);
  for (int k = 0; k < L; ++k) {
    for (int i = 0; i < options.words_per_label; ++i) {
      std::string word = "w" + std::to_string(k) + "_" + std::to_string(i);
      int row = static_cast<int>(vocab.size());
      for (int j = 0; j < free_dims; ++j) {
        vectors(row, j) = centroids(k, j) + options.word_noise * rng.Normal();
      }
      if (marker) {
        bool marked = rng.Uniform() < options.marked_fraction;
        vectors(row, d - 1) = marked ? 1.0 : -1.0;
        if (marked) marked_.push_back(word);
      }
      vocab.push_back(word);
      words_[k].push_back(word);
    }
  }
  std::sort(marked_.begin(), marked_.end());
  embeddings_ = EmbeddingTable(vocab, vectors);
}

int SyntheticTask::LabelOf(const std::string &word) const {
  for (int k = 0; k < static_cast<int>(words_.size()); ++k) {
    if (std::find(words_[k].begin(), words_[k].end(), word) != words_[k].end()) {
      return k;
    }
  }
  throw Error("word not in the synthetic vocabulary: " + word);
}

bool SyntheticTask::IsMarked(const std::string &word) const {
  return std::binary_search(marked_.begin(), marked_.end(), word);
}

Dataset SyntheticTask::Generate(std::int64_t tokens, Rng &rng) const {
  const int L = tags_.label_count();
  std::vector<double> weights = options_.label_weights;
  if (weights.empty()) weights.assign(L, 1.0);
  Dataset dataset;
  dataset.tag_set = tags_;
  std::int64_t produced = 0;
  while (produced < tokens) {
    int span = options_.max_sentence_length - options_.min_sentence_length + 1;
    int length = options_.min_sentence_length + static_cast<int>(rng.UniformInt(span));
    LabeledSentence sentence;
    std::vector<int> labels;
    for (int t = 0; t < length; ++t) {
      int label = rng.Categorical(weights);
      const auto &pool = words_[label];
      sentence.tokens.push_back(pool[rng.UniformInt(pool.size())]);
      labels.push_back(label);
    }
    sentence.spans = LabelsToSpans(labels, tags_);
    produced += length;
    dataset.sentences.push_back(std::move(sentence));
  }
  return dataset;
}

// ---------------------------------------------------------------------------
// Noise injection

namespace {

template <typename Corrupt>
Dataset Relabel(const Dataset &gold, Corrupt corrupt) {
  Dataset out = gold;
  for (auto &sentence : out.sentences) {
    auto labels = SpansToLabels(sentence, gold.tag_set);
    for (int t = 0; t < sentence.size(); ++t) {
      labels[t] = corrupt(sentence.tokens[t], labels[t]);
    }
    sentence.spans = LabelsToSpans(labels, gold.tag_set);
    sentence.provenance = Provenance::kDistant;
  }
  return out;
}

}  // namespace

Dataset ApplyUniformNoise(const Dataset &gold, double rate, Rng &rng) {
  const int L = gold.tag_set.label_count();
  return Relabel(gold, [&](const std::string &, int label) {
    if (L < 2 || rng.Uniform() >= rate) return label;
    int other = static_cast<int>(rng.UniformInt(L - 1));
    return other >= label ? other + 1 : other;
  });
}

Dataset ApplyChannelNoise(const Dataset &gold, const ConfusionMatrix &channel,
                          Rng &rng) {
  return ApplyConditionalNoise(
      gold, channel, [](const std::string &) { return true; }, rng);
}

Dataset ApplyConditionalNoise(
    const Dataset &gold, const ConfusionMatrix &channel,
    const std::function<bool(const std::string &)> &affected, Rng &rng) {
  if (channel.label_count() != gold.tag_set.label_count()) {
    throw Error("channel size does not match the tag set");
  }
  return Relabel(gold, [&](const std::string &token, int label) {
    if (!affected(token)) return label;
    return rng.Categorical(channel.matrix().row(label));
  });
}

double TokenAccuracy(const Dataset &gold, const TaggerParams &params,
                     const EmbeddingTable &table) {
  std::int64_t correct = 0, total = 0;
  for (const auto &sentence : gold.sentences) {
    auto expected = SpansToLabels(sentence, gold.tag_set);
    auto predicted = PredictLabels(sentence.tokens, params, table);
    for (size_t t = 0; t < expected.size(); ++t) {
      correct += expected[t] == predicted[t];
      ++total;
    }
  }
  return total == 0 ? 0.0 : double(correct) / total;
}

// ---------------------------------------------------------------------------
// Pipeline corpus

namespace {

const std::vector<std::string> kConsonants = {"b", "d", "f", "g", "gb", "h",
                                              "j", "k", "l", "m", "n", "p",
                                              "r", "s", "ṣ", "t", "w", "y"};
const std::vector<std::string> kNameConsonants = {"B", "D", "F", "G", "Gb", "J",
                                                  "K", "L", "M", "N", "P", "R",
                                                  "S", "T", "W", "Y"};
const std::vector<std::string> kVowels = {"a", "e", "ẹ", "i", "o", "ọ", "u"};
const std::vector<std::string> kTones = {"", "", "́", "̀"};
const std::vector<std::string> kMonths = {"Ṣẹ́rẹ́", "Èrèlè", "Ẹrẹ̀nà", "Igbe",
                                          "Ẹ̀bibi", "Òkúdu", "Agẹmọ", "Ògún",
                                          "Owewe", "Ọ̀wàrà", "Bélú", "Ọ̀pẹ̀"};
const std::vector<std::string> kOrgHeads = {"Ẹgbẹ́", "Ilé-iṣẹ́", "Àjọ"};

class WordMaker {
 public:
  explicit WordMaker(Rng &rng) : rng_(rng) {}

  std::string Make(int min_syllables, int max_syllables, bool capitalized) {
    while (true) {
      int count = min_syllables +
                  static_cast<int>(rng_.UniformInt(max_syllables - min_syllables + 1));
      std::string word;
      for (int s = 0; s < count; ++s) {
        const auto &consonants = (s == 0 && capitalized) ? kNameConsonants : kConsonants;
        word += consonants[rng_.UniformInt(consonants.size())];
        word += kVowels[rng_.UniformInt(kVowels.size())];
        word += kTones[rng_.UniformInt(kTones.size())];
      }
      word = NormalizeNfc(word);
      if (used_.insert(Lowercase(word)).second) return word;
    }
  }

 private:
  Rng &rng_;
  std::set<std::string> used_;
};

template <typename T>
const T &Pick(const std::vector<T> &items, Rng &rng) {
  return items[rng.UniformInt(items.size())];
}

struct Lexicon {
  std::vector<std::string> filler;
  std::vector<std::string> first_names;
  std::vector<std::string> surnames;
  std::vector<std::vector<std::string>> locations;
  std::vector<std::vector<std::string>> organizations;
  std::vector<std::string> ambiguous;  // filler words that are also first names
};

Lexicon MakeLexicon(Rng &rng) {
  WordMaker maker(rng);
  Lexicon lex;
  for (int i = 0; i < 300; ++i) lex.filler.push_back(maker.Make(1, 3, false));
  for (int i = 0; i < 120; ++i) lex.first_names.push_back(maker.Make(2, 3, true));
  for (int i = 0; i < 80; ++i) lex.surnames.push_back(maker.Make(2, 4, true));
  for (int i = 0; i < 60; ++i) {
    std::vector<std::string> loc{maker.Make(1, 3, true)};
    if (rng.Uniform() < 0.3) loc.push_back(maker.Make(1, 2, true));
    lex.locations.push_back(loc);
  }
  for (int i = 0; i < 40; ++i) {
    std::vector<std::string> org{Pick(kOrgHeads, rng), maker.Make(2, 3, true)};
    if (rng.Uniform() < 0.5) org.push_back(maker.Make(1, 3, true));
    lex.organizations.push_back(org);
  }
  // Capitalized filler that collides with names creates realistic false hits.
  for (int i = 0; i < 6; ++i) lex.ambiguous.push_back(lex.first_names[i]);
  return lex;
}

std::vector<std::string> DateExpression(Rng &rng) {
  auto number = [&](int lo, int hi) {
    return std::to_string(lo + static_cast<int>(rng.UniformInt(hi - lo + 1)));
  };
  switch (rng.UniformInt(6)) {
    case 0: return {"ọjọ́", number(1, 30), "oṣù", Pick(kMonths, rng)};
    case 1: return {"ọdún", number(1960, 2019)};
    case 2: return {"oṣù", Pick(kMonths, rng)};
    case 3: return {"wákàtí", number(1, 12)};
    case 4: return {"aago", number(1, 12)};
    default: return {"lọ́dún", number(1990, 2019)};
  }
}

Dataset MakeSentences(const Lexicon &lex, const TagSet &tags, std::int64_t tokens,
                      Rng &rng) {
  Dataset dataset;
  dataset.tag_set = tags;
  std::int64_t produced = 0;
  while (produced < tokens) {
    LabeledSentence sentence;
    int slots = 6 + static_cast<int>(rng.UniformInt(9));
    for (int s = 0; s < slots; ++s) {
      double u = rng.Uniform();
      std::vector<std::string> words;
      std::string type;
      if (u < 0.10) {
        type = "PER";
        words.push_back(Pick(lex.first_names, rng));
        if (rng.Uniform() < 0.6) words.push_back(Pick(lex.surnames, rng));
      } else if (u < 0.17) {
        type = "LOC";
        words = Pick(lex.locations, rng);
      } else if (u < 0.21) {
        type = "ORG";
        words = Pick(lex.organizations, rng);
      } else if (u < 0.25) {
        type = "DATE";
        words = DateExpression(rng);
      } else if (u < 0.27) {
        words.push_back(std::to_string(2 + rng.UniformInt(40)));
      } else if (u < 0.29) {
        words.push_back(Pick(lex.ambiguous, rng));
      } else if (u < 0.33) {
        words.push_back(",");
      } else {
        words.push_back(Pick(lex.filler, rng));
      }
      int start = sentence.size();
      sentence.tokens.insert(sentence.tokens.end(), words.begin(), words.end());
      if (!type.empty()) {
        // Adjacent same-type mentions would be indistinguishable under IO.
        if (!sentence.spans.empty() && sentence.spans.back().end == start &&
            sentence.spans.back().type == type) {
          sentence.tokens.insert(sentence.tokens.begin() + start, Pick(lex.filler, rng));
          ++start;
        }
        sentence.spans.push_back({type, start, sentence.size()});
      }
    }
    sentence.tokens.push_back(".");
    produced += sentence.size();
    dataset.sentences.push_back(std::move(sentence));
  }
  return dataset;
}

}  // namespace

PipelineCorpus MakePipelineCorpus(const PipelineCorpusOptions &options) {
  Rng rng(options.seed);
  TagSet tags;
  Lexicon lex = MakeLexicon(rng);
  PipelineCorpus corpus;
  corpus.train = MakeSentences(lex, tags, options.train_tokens, rng);
  corpus.test = MakeSentences(lex, tags, options.test_tokens, rng);
  corpus.extra = WithProvenance(MakeSentences(lex, tags, options.extra_tokens, rng),
                                Provenance::kDistant);
  corpus.keywords = DateRuleSet::DefaultKeywords();

  auto entry = [](std::vector<std::string> surface, std::string type,
                  std::string source) {
    return GazetteerEntry{std::move(surface), std::move(type), std::move(source)};
  };
  for (size_t i = 0; i < lex.first_names.size(); ++i) {
    double u = rng.Uniform();
    if (u < 0.25) {
      corpus.wikidata.push_back(entry({lex.first_names[i]}, "PER", "wikidata"));
    } else if (u < 0.60) {
      corpus.nigerian_names.push_back(
          entry({lex.first_names[i]}, "PER", "nigerian-names"));
    }
    if (rng.Uniform() < 0.3) {
      corpus.wikidata.push_back(entry({lex.first_names[i], Pick(lex.surnames, rng)},
                                      "PER", "wikidata"));
    }
  }
  for (const char *noise : {"A", "O", "Ẹ"}) {
    corpus.wikidata.push_back(entry({noise}, "PER", "wikidata"));
  }
  for (const char *noise : {"Ade", "Bo"}) {
    corpus.nigerian_names.push_back(entry({noise}, "PER", "nigerian-names"));
  }
  for (const auto &loc : lex.locations) {
    if (rng.Uniform() < 0.7) corpus.wikidata.push_back(entry(loc, "LOC", "wikidata"));
  }
  for (int i = 0; i < 5; ++i) {
    corpus.wikidata.push_back(entry({lex.filler[10 + i]}, "LOC", "wikidata"));
  }
  for (const auto &org : lex.organizations) {
    double u = rng.Uniform();
    if (u < 0.3) {
      corpus.wikidata.push_back(entry(org, "ORG", "wikidata"));
    } else if (u < 0.5) {
      // Partial names only cover the head and first name word.
      corpus.wikidata.push_back(entry({org[0], org[1]}, "ORG", "wikidata"));
    }
  }
  // A location that doubles as an organization name.
  corpus.wikidata.push_back(entry(lex.locations[0], "ORG", "wikidata"));
  std::sort(corpus.wikidata.begin(), corpus.wikidata.end());
  std::sort(corpus.nigerian_names.begin(), corpus.nigerian_names.end());

  // Word vectors: label centroid plus noise; a few words stay out of vocabulary.
  const int d = options.dimension;
  const int L = tags.label_count();
  Eigen::MatrixXd centroids(L, d);
  for (int k = 0; k < L; ++k) {
    for (int j = 0; j < d; ++j) centroids(k, j) = rng.Normal();
  }
  std::map<std::string, int> label_of;
  for (const Dataset *ds : {&corpus.train, &corpus.test, &corpus.extra}) {
    for (const auto &sentence : ds->sentences) {
      auto labels = SpansToLabels(sentence, tags);
      for (int t = 0; t < sentence.size(); ++t) {
        label_of.emplace(sentence.tokens[t], labels[t]);
      }
    }
  }
  std::vector<std::string> words;
  std::vector<Eigen::VectorXd> rows;
  for (const auto &[word, label] : label_of) {
    if (rng.Uniform() < 0.05) continue;
    Eigen::VectorXd v(d);
    for (int j = 0; j < d; ++j) v(j) = centroids(label, j) + 0.9 * rng.Normal();
    words.push_back(word);
    rows.push_back(v);
  }
  RowMatrix vectors(static_cast<Eigen::Index>(rows.size()), d);
  for (size_t r = 0; r < rows.size(); ++r) vectors.row(r) = rows[r].transpose();
  corpus.embeddings = EmbeddingTable(words, vectors);
  return corpus;
}

void WritePipelineCorpus(const PipelineCorpus &corpus, const std::string &directory) {
  namespace fs = std::filesystem;
  fs::create_directories(directory);
  fs::path dir(directory);
  WriteConll(corpus.train, (dir / "train.conll").string());
  WriteConll(corpus.test, (dir / "test.conll").string());
  WriteConll(corpus.extra, (dir / "extra.conll").string());
  WriteEntityTsv(corpus.wikidata, (dir / "wikidata.tsv").string());
  WriteEntityTsv(corpus.nigerian_names, (dir / "nigerian_names.tsv").string());
  {
    std::ofstream out(dir / "date_keywords.txt", std::ios::binary | std::ios::trunc);
    out << "# Yoruba date keywords, one per line\n";
    for (const auto &keyword : corpus.keywords) out << keyword << '\n';
  }
  corpus.embeddings.Save((dir / "vectors.txt").string());

  nlohmann::ordered_json config;
  config["train"] = "train.conll";
  config["test"] = "test.conll";
  config["extra_distant"] = {"extra.conll"};
  config["gazetteers"] = {"wikidata.tsv", "nigerian_names.tsv"};
  config["keywords"] = "date_keywords.txt";
  config["embeddings"] = "vectors.txt";
  config["min_length"] = {{"wikidata", 2}, {"nigerian-names", 3}};
  config["clean_budgets"] = {1000, 2000, "unlimited"};
  config["methods"] = {"baseline-clean", "naive-mix",  "confusion",
                       "noise-channel",  "cleaning",   "distant-only"};
  config["repeats"] = 3;
  config["base_seed"] = 1;
  config["hidden_size"] = 16;
  config["feature_size"] = 16;
  config["learning_rate"] = 0.05;
  config["epochs"] = 8;
  config["cell"] = "lstm";
  config["em_iterations"] = 4;
  config["em_warm_start_epochs"] = 4;
  config["cleaner_epochs"] = 10;
  config["output_dir"] = "results";
  std::ofstream out(dir / "experiment.json", std::ios::binary | std::ios::trunc);
  out << config.dump(2) << '\n';
}

}  // namespace wsner
