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

// End-to-end checks of the toolkit. Prints one PASS/FAIL/SKIP line per check
// and exits non-zero when any check fails.

#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "brute_force_matcher.h"
#include "channel_fixtures.h"
#include "gradient_check.h"
#include "scorer_cases.h"
#include "test_util.h"
#include "wsner/date_rules.h"
#include "wsner/eval.h"
#include "wsner/experiment.h"
#include "wsner/gazetteer.h"
#include "wsner/noise.h"
#include "wsner/synthetic.h"
#include "wsner/tagger.h"

namespace wsner {
namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  enum Status { kPass, kFail, kSkip } status = kFail;
  std::string detail;
};

Outcome Pass(std::string detail) { return {Outcome::kPass, std::move(detail)}; }
Outcome Fail(std::string detail) { return {Outcome::kFail, std::move(detail)}; }
Outcome Check(bool ok, std::string detail) { return ok ? Pass(detail) : Fail(detail); }

std::string Format(const char *format, ...) __attribute__((format(printf, 1, 2)));
std::string Format(const char *format, ...) {
  char buffer[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buffer, sizeof(buffer), format, args);
  va_end(args);
  return buffer;
}

std::string ReadFile(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string DataDir() {
  const char *env = std::getenv("WSNER_DATA_DIR");
  return env != nullptr ? env : WSNER_SOURCE_DATA_DIR;
}

// 1. Trie matcher against the window oracle.
Outcome GazetteerOracle() {
  Rng rng(2020);
  auto entries = testing::RandomEntries(rng, 50, 30, 4);
  GazetteerOptions options;
  Gazetteer gazetteer = Gazetteer::Build(entries, options);
  testing::WindowOracle oracle(entries, options, TagSet());
  int mismatches = 0, spans = 0;
  for (int s = 0; s < 1000; ++s) {
    auto tokens = testing::RandomTokens(rng, 50, 1 + static_cast<int>(rng.UniformInt(20)));
    auto found = gazetteer.Match(tokens);
    spans += static_cast<int>(found.size());
    if (found != oracle.Match(tokens)) ++mismatches;
  }
  return Check(mismatches == 0 && spans > 0,
               Format("%d mismatches, %d spans matched", mismatches, spans));
}

// 2. "8th of December, 2018".
Outcome DateExample() {
  DateRuleSet rules = DateRuleSet::Default();
  std::vector<std::string> tokens = {"ọjọ́", "8", "oṣù", "Ọpẹ̀", ",", "ọdún", "2018"};
  std::vector<EntitySpan> expected = {{"DATE", 0, 4}, {"DATE", 5, 7}};
  LabeledSentence sentence{tokens, rules.Annotate(tokens)};
  std::string tags;
  for (const auto &tag : SpansToBio(sentence)) tags += (tags.empty() ? "tags " : " ") + tag;
  return Check(sentence.spans == expected && rules.Mark(tokens) ==
                                                 std::vector<bool>{true, true, true, true,
                                                                   false, true, true},
               tags);
}

// 3. Finite differences on random tiny models.
Outcome GradientFidelity() {
  Rng rng(3);
  double worst = 0.0;
  int largest = 0;
  for (int trial = 0; trial < 50; ++trial) {
    testing::TinyProblem problem = testing::RandomTinyProblem(rng, 200);
    largest = std::max(largest, problem.params.size());
    worst = std::max(worst, testing::TaggerGradientError(problem));
  }
  return Check(worst < 1e-4 && largest <= 200,
               Format("max relative error %.2e, largest model %d parameters", worst, largest));
}

// 4. A five-sentence corpus is learned exactly.
Outcome Overfitting() {
  Dataset d;
  auto add = [&d](std::vector<std::string> tokens, std::vector<EntitySpan> spans) {
    d.sentences.push_back({std::move(tokens), std::move(spans)});
  };
  add({"Adé", "lọ", "sí", "Èkó"}, {{"PER", 0, 1}, {"LOC", 3, 4}});
  add({"Bọ́lá", "wà", "ní", "Ìbàdàn"}, {{"PER", 0, 1}, {"LOC", 3, 4}});
  add({"ọjọ́", "8", "oṣù", "Ọpẹ̀"}, {{"DATE", 0, 4}});
  add({"Ẹgbẹ́", "Olùkọ́", "pàdé"}, {{"ORG", 0, 2}});
  add({"Adé", "àti", "Bọ́lá", "lọ"}, {{"PER", 0, 1}, {"PER", 2, 3}});

  std::vector<std::string> words;
  for (const auto &s : d.sentences) {
    for (const auto &t : s.tokens) {
      if (std::find(words.begin(), words.end(), t) == words.end()) words.push_back(t);
    }
  }
  Rng rng(4);
  RowMatrix vectors(static_cast<Eigen::Index>(words.size()), 6);
  for (Eigen::Index r = 0; r < vectors.rows(); ++r) {
    for (int k = 0; k < 6; ++k) vectors(r, k) = rng.Normal();
  }
  EmbeddingTable table(words, vectors);

  TaggerConfig config;
  config.hidden_size = 8;
  config.feature_size = 8;
  config.learning_rate = 0.1;
  config.epochs = 200;
  config.seed = 5;
  TaggerParams params = Train(d, config, table);
  const double accuracy = TokenAccuracy(d, params, table);
  const bool repeatable = Train(d, config, table) == params;
  config.seed = 6;
  const bool seed_matters = !(Train(d, config, table) == params);
  return Check(accuracy == 1.0 && repeatable && seed_matters,
               Format("token accuracy %.3f, same seed identical %s, new seed differs %s",
                      accuracy, repeatable ? "yes" : "no", seed_matters ? "yes" : "no"));
}

// 5. Channel estimation by counting and by EM.
Outcome ChannelRecovery() {
  ConfusionMatrix truth = testing::GeneratingChannel();
  Rng rng(1);
  const double counted =
      EstimateConfusion(testing::SamplePairs(truth, 10000, rng), 5, 0.0).MaxRowL1(truth);

  testing::GeneratedNoise data = testing::GenerateThroughChannel(truth, 5000, 3);
  NoiseConfig config;
  config.tagger = data.config;
  config.em_iterations = 20;
  config.em_warm_start_epochs = 0;
  config.em_initial_params = data.generator;
  config.em_freeze_model = true;
  EmResult em = EmNoiseChannel(data.noisy, nullptr, config, data.table);
  const double fixed_model = em.state.channel.MaxRowL1(truth);

  // Channel-only EM on random model outputs.
  Rng draws(31);
  bool monotone = true;
  for (int trial = 0; trial < 30; ++trial) {
    const int L = 2 + static_cast<int>(draws.UniformInt(4));
    const int n = 5 + static_cast<int>(draws.UniformInt(200));
    Eigen::MatrixXd probs(L, n);
    std::vector<int> noisy;
    for (int i = 0; i < n; ++i) {
      for (int t = 0; t < L; ++t) probs(t, i) = draws.Uniform() + 1e-3;
      probs.col(i) /= probs.col(i).sum();
      noisy.push_back(static_cast<int>(draws.UniformInt(L)));
    }
    Eigen::MatrixXd start(L, L);
    for (int t = 0; t < L; ++t) {
      for (int y = 0; y < L; ++y) start(t, y) = draws.Uniform() + (t == y ? 1.0 : 0.1);
      start.row(t) /= start.row(t).sum();
    }
    auto ll = ChannelOnlyEm(probs, noisy, ConfusionMatrix(start), 20).log_likelihood;
    for (size_t k = 1; k < ll.size(); ++k) monotone &= ll[k] >= ll[k - 1] - 1e-8;
  }
  for (size_t k = 1; k < em.state.log_likelihood.size(); ++k) {
    monotone &= em.state.log_likelihood[k] >= em.state.log_likelihood[k - 1] - 1e-8;
  }

  // Reported only: EM that also trains the tagger from scratch.
  NoiseConfig joint;
  joint.tagger = data.config;
  joint.em_iterations = 20;
  joint.em_warm_start_epochs = 3;
  const double joint_l1 =
      EmNoiseChannel(data.noisy, nullptr, joint, data.table).state.channel.MaxRowL1(truth);

  return Check(counted <= 0.05 && fixed_model <= 0.1 && monotone,
               Format("counting L1 %.3f, EM L1 %.3f, likelihood monotone %s "
                      "(joint EM L1 %.3f)",
                      counted, fixed_model, monotone ? "yes" : "no", joint_l1));
}

// 6. Uniform label noise on the synthetic benchmark.
Outcome NoiseBenefit() {
  double confusion = 0.0, naive = 0.0, clean_only = 0.0;
  const int seeds = 5;
  for (int seed = 1; seed <= seeds; ++seed) {
    SyntheticTaskOptions options;
    options.words_per_label = 200;
    options.dimension = 16;
    options.centroid_scale = 0.5;
    options.word_noise = 1.0;
    options.seed = seed;
    SyntheticTask task(options);
    Rng rng(seed);
    Dataset clean = task.Generate(200, rng);
    Dataset distant = ApplyUniformNoise(task.Generate(5000, rng), 0.3, rng);
    Dataset pair_source = ApplyUniformNoise(clean, 0.3, rng);
    Dataset test = task.Generate(3000, rng);

    NoiseConfig config;
    config.tagger.hidden_size = 32;
    config.tagger.feature_size = 32;
    config.tagger.learning_rate = 0.05;
    config.tagger.epochs = 20;
    config.tagger.seed = seed;
    const EmbeddingTable &table = task.embeddings();
    confusion += TokenAccuracy(
        test, TrainConfusionMethod(clean, distant, pair_source, config, table).params, table);
    naive += TokenAccuracy(test, TrainNaiveMix(clean, distant, config.tagger, table), table);
    clean_only += TokenAccuracy(test, Train(clean, config.tagger, table), table);
  }
  confusion /= seeds;
  naive /= seeds;
  clean_only /= seeds;
  return Check(confusion - naive >= 0.02 && naive - clean_only >= 0.02,
               Format("mean accuracy confusion %.3f, naive-mix %.3f, clean-only %.3f",
                      confusion, naive, clean_only));
}

// 7. Identity channel and empty distant data.
Outcome Degeneracies() {
  SyntheticTaskOptions options;
  options.words_per_label = 20;
  options.dimension = 8;
  options.centroid_scale = 2.0;
  options.word_noise = 0.5;
  SyntheticTask task(options);
  Rng rng(7);
  Dataset clean = task.Generate(300, rng);
  Dataset distant = ApplyUniformNoise(task.Generate(1500, rng), 0.3, rng);
  Dataset pair_source = ApplyUniformNoise(clean, 0.3, rng);
  const EmbeddingTable &table = task.embeddings();

  MethodOptions method;
  method.noise.tagger.hidden_size = 8;
  method.noise.tagger.feature_size = 8;
  method.noise.tagger.learning_rate = 0.05;
  method.noise.tagger.epochs = 3;
  method.noise.tagger.seed = 3;
  method.noise.cleaner_epochs = 2;

  NoiseConfig identity = method.noise;
  identity.initial_channel = ConfusionMatrix::Identity(5);
  identity.freeze_channel = true;
  TaggerParams naive = TrainNaiveMix(clean, distant, identity.tagger, table);
  const bool confusion_naive =
      TrainConfusionMethod(clean, distant, pair_source, identity, table).params == naive;

  Dataset empty;
  TaggerParams baseline = Train(clean, method.noise.tagger, table);
  std::string differing;
  for (Method m : AllMethods()) {
    if (m == Method::kDistantOnly) continue;  // no tagger
    if (!(TrainWithMethod(m, clean, empty, pair_source, method, table) == baseline)) {
      differing += " " + std::string(MethodName(m));
    }
  }
  return Check(confusion_naive && differing.empty(),
               Format("identity confusion equals naive-mix %s, methods differing from "
                      "baseline on empty distant data:%s",
                      confusion_naive ? "yes" : "no", differing.empty() ? " none" : differing.c_str()));
}

// 8. Hand-scored span cases.
Outcome ScorerConformance() {
  int wrong = 0;
  std::string names;
  for (const auto &c : testing::ScorerCases()) {
    RunMetrics m = SpanPrf(testing::TagsToDataset(c.gold), testing::TagsToDataset(c.pred));
    bool ok = m.overall.true_positives == c.tp && m.overall.predicted == c.predicted &&
              m.overall.gold == c.gold_count && m.overall.precision == c.precision &&
              m.overall.recall == c.recall && std::abs(m.overall.f1 - c.f1) < 1e-15;
    for (const auto &[type, prf] : m.per_class) {
      testing::ClassCounts expected{type, 0, 0, 0};
      for (const auto &cc : c.classes) {
        if (cc.type == type) expected = cc;
      }
      ok &= prf.true_positives == expected.tp && prf.predicted == expected.predicted &&
            prf.gold == expected.gold;
    }
    if (!ok) {
      ++wrong;
      names += " " + c.name;
    }
  }
  const int total = static_cast<int>(testing::ScorerCases().size());
  return Check(wrong == 0 && total == 20,
               Format("%d of %d cases match%s", total - wrong, total, names.c_str()));
}

// 9. Distant annotation quality on the Yoruba news corpus, when available.
// WSNER_YORUBA_DIR holds test.conll, entity lists as *.tsv and optionally
// date_keywords.txt.
Outcome YorubaAnnotationQuality() {
  const char *dir = std::getenv("WSNER_YORUBA_DIR");
  if (dir == nullptr || !std::filesystem::exists(std::filesystem::path(dir) / "test.conll")) {
    return {Outcome::kSkip, "dataset not available (set WSNER_YORUBA_DIR)"};
  }
  std::filesystem::path root(dir);
  std::vector<std::string> lists;
  for (const auto &entry : std::filesystem::directory_iterator(root)) {
    if (entry.path().extension() == ".tsv") lists.push_back(entry.path().string());
  }
  std::sort(lists.begin(), lists.end());
  std::string keywords;
  if (std::filesystem::exists(root / "date_keywords.txt")) {
    keywords = (root / "date_keywords.txt").string();
  }
  TagSet tags;
  GazetteerOptions options;
  options.min_length = {{"wikidata", 2}, {"nigerian-names", 3}};
  Dataset gold = ReadConll((root / "test.conll").string(), TagScheme::kAuto, tags);
  DistantSupervision distant = LoadDistantSupervision(lists, keywords, options, tags);
  RunMetrics m = AnnotationQuality(gold, distant.Annotate(gold));
  const std::map<std::string, double> reference = {
      {"PER", 22}, {"LOC", 62}, {"ORG", 22}, {"DATE", 48}};
  bool ok = std::abs(100 * m.overall.f1 - 41) <= 5;
  std::string detail = Format("overall %.1f", 100 * m.overall.f1);
  for (const auto &[type, prf] : m.per_class) {
    ok &= std::abs(100 * prf.f1 - reference.at(type)) <= 5;
    detail += Format(", %s %.1f", type.c_str(), 100 * prf.f1);
  }
  return Check(ok, detail + " F1");
}

// 10. Two identical sweeps over the bundled corpus.
Outcome SweepDeterminism() {
  testing::TempDir dir("acceptance_sweep");
  std::string csv[2];
  int runs = 0;
  for (int round = 0; round < 2; ++round) {
    ExperimentConfig config = LoadExperimentConfig(DataDir() + "/synthetic/experiment.json");
    config.output_dir = dir.File("round" + std::to_string(round));
    ExperimentSummary summary = RunExperiment(config);
    csv[round] = ReadFile(summary.runs_csv);
    runs = summary.completed;
    if (summary.failed > 0) return Fail(Format("%d failed cells", summary.failed));
  }
  return Check(!csv[0].empty() && csv[0] == csv[1],
               Format("%d runs, runs.csv %zu bytes, identical %s", runs, csv[0].size(),
                      csv[0] == csv[1] ? "yes" : "no"));
}

struct AcceptanceCheck {
  int number;
  const char *name;
  double limit_seconds;
  std::function<Outcome()> run;
};

}  // namespace
}  // namespace wsner

int main(int argc, char **argv) {
  using namespace wsner;
  const std::vector<AcceptanceCheck> checks = {
      {1, "gazetteer oracle equivalence", 10, GazetteerOracle},
      {2, "date-rule example", 1, DateExample},
      {3, "gradient fidelity", 30, GradientFidelity},
      {4, "overfitting oracle", 10, Overfitting},
      {5, "channel recovery", 60, ChannelRecovery},
      {6, "noise-handling benefit", 600, NoiseBenefit},
      {7, "identity degeneracies", 60, Degeneracies},
      {8, "scorer conformance", 1, ScorerConformance},
      {9, "distant annotation quality", 300, YorubaAnnotationQuality},
      {10, "end-to-end determinism", 600, SweepDeterminism},
  };
  // Optional arguments select checks by number.
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));

  int failures = 0;
  for (const auto &c : checks) {
    if (!selected.empty() &&
        std::find(selected.begin(), selected.end(), c.number) == selected.end()) {
      continue;
    }
    auto start = Clock::now();
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception &e) {
      outcome = Fail(std::string("exception: ") + e.what());
    }
    const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
    if (outcome.status == Outcome::kPass && seconds > c.limit_seconds) {
      outcome = Fail(outcome.detail + Format("; over the %.0f s limit", c.limit_seconds));
    }
    const char *label = outcome.status == Outcome::kPass   ? "PASS"
                        : outcome.status == Outcome::kSkip ? "SKIP"
                                                           : "FAIL";
    failures += outcome.status == Outcome::kFail;
    std::printf("%s %2d %s: %s (%.1f s)\n", label, c.number, c.name, outcome.detail.c_str(),
                seconds);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
