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

#ifndef WSNER_EXPERIMENT_H_
#define WSNER_EXPERIMENT_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wsner/corpus.h"
#include "wsner/date_rules.h"
#include "wsner/eval.h"
#include "wsner/gazetteer.h"
#include "wsner/noise.h"
#include "wsner/tagger.h"

namespace wsner {

enum class Method {
  kBaselineClean,
  kNaiveMix,
  kConfusion,
  kNoiseChannel,
  kCleaning,
  kDistantOnly,
};

std::string_view MethodName(Method method);
// Throws SchemaError for unknown names.
Method ParseMethod(std::string_view name);
const std::vector<Method> &AllMethods();

// Entity lists plus optional date rules.
struct DistantSupervision {
  Gazetteer gazetteer;
  std::optional<DateRuleSet> date_rules;

  Dataset Annotate(const Dataset &dataset) const;
};

// Reads entity TSV files and an optional keyword file (empty path: the
// built-in keywords). Date rules are only attached when the tag set has DATE.
DistantSupervision LoadDistantSupervision(const std::vector<std::string> &gazetteers,
                                          const std::string &keywords,
                                          const GazetteerOptions &options,
                                          const TagSet &tags);

struct MethodOptions {
  NoiseConfig noise;
  // Noise channel: clean data keeps hard targets next to the EM targets
  // (mixed) or passes through the channel with the distant data (all-noisy).
  bool noise_channel_mixed = true;
};

// Trains one tagger. `pair_source` is the distant re-annotation of `clean`,
// used to estimate confusion matrices and cleaner training pairs. An empty
// distant set reduces every method to training on `clean`. kDistantOnly has
// no model and throws Error.
TaggerParams TrainWithMethod(Method method, const Dataset &clean,
                             const Dataset &distant, const Dataset &pair_source,
                             const MethodOptions &options,
                             const EmbeddingTable &table);

struct ExperimentConfig {
  std::vector<std::int64_t> clean_budgets = {1000, 2000, 4000, kUnlimitedBudget};
  std::vector<Method> methods = AllMethods();
  int repeats = 20;
  std::uint64_t base_seed = 1;

  std::string train;
  std::string test;
  std::vector<std::string> extra_distant;
  std::vector<std::string> gazetteers;
  std::string keywords;  // empty: built-in keywords
  std::string embeddings;
  TagScheme scheme = TagScheme::kAuto;
  std::vector<std::string> entity_types = {"PER", "ORG", "LOC", "DATE"};
  GazetteerOptions gazetteer;

  MethodOptions training;
  std::string output_dir = "results";
  int parallel = 1;

  // Throws SchemaError on bad values or missing files.
  void Validate() const;
};

std::string BudgetName(std::int64_t budget);
std::int64_t ParseBudget(std::string_view text);

// Flat JSON document. Relative paths are resolved against `base_dir`.
// Unknown keys and ill-typed values throw SchemaError.
ExperimentConfig ParseExperimentConfig(std::string_view json,
                                       const std::string &base_dir = ".");
ExperimentConfig LoadExperimentConfig(const std::string &path);

struct ExperimentSummary {
  int completed = 0;  // cells run by this call
  int skipped = 0;    // cells found in an existing runs.csv
  int failed = 0;
  std::string runs_csv;
  std::string aggregate_csv;
};

// Runs every (budget, method, repeat) cell and writes runs.csv and
// aggregate.csv under output_dir. Cells already present in runs.csv are kept
// and skipped. A failing cell becomes a row whose status starts with "error".
ExperimentSummary RunExperiment(const ExperimentConfig &config);

// CSV helpers shared with the command-line tool.
std::string FormatNumber(double value);
std::vector<std::string> MetricsHeader(const TagSet &tags);
void WriteMetricsCsv(const RunMetrics &metrics, const std::string &path);

}  // namespace wsner

#endif  // WSNER_EXPERIMENT_H_
