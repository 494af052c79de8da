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

// Command-line front end: ingest, annotate, train, evaluate, quality,
// inspect, experiment and synth.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "wsner/corpus.h"
#include "wsner/errors.h"
#include "wsner/eval.h"
#include "wsner/experiment.h"
#include "wsner/gazetteer.h"
#include "wsner/ingest.h"
#include "wsner/noise.h"
#include "wsner/synthetic.h"
#include "wsner/tagger.h"
#include "wsner/text.h"

namespace {

using namespace wsner;

// Flag combinations that parse but make no sense; exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

TagScheme SchemeFromName(const std::string &name) {
  if (name == "bio") return TagScheme::kBio;
  if (name == "io") return TagScheme::kIo;
  return TagScheme::kAuto;
}

const std::vector<std::string> kSchemes = {"auto", "bio", "io"};

// Options shared by every command that builds a gazetteer.
struct GazetteerFlags {
  std::vector<std::string> files;
  std::string keywords;
  std::vector<std::string> min_length;  // SOURCE=N
  int default_min_length = 1;
  bool lowercase = false;
  bool strip_diacritics = false;
  std::vector<std::string> priority = {"PER", "LOC", "ORG"};

  void Register(CLI::App *app, bool required) {
    auto *opt = app->add_option("--gazetteer", files, "Entity TSV file (repeatable)")
                    ->check(CLI::ExistingFile);
    if (required) opt->required();
    app->add_option("--keywords", keywords, "Date keyword file (default: built-in)")
        ->check(CLI::ExistingFile);
    app->add_option("--min-length", min_length,
                    "Minimum surface length per source, SOURCE=N (repeatable)");
    app->add_option("--default-min-length", default_min_length,
                    "Minimum surface length for other sources")
        ->check(CLI::PositiveNumber);
    app->add_flag("--lowercase", lowercase, "Match case-insensitively");
    app->add_flag("--strip-diacritics", strip_diacritics, "Ignore tone marks");
    app->add_option("--priority", priority, "Type order for ambiguous entries");
  }

  GazetteerOptions Options() const {
    GazetteerOptions options;
    for (const auto &item : min_length) {
      auto eq = item.rfind('=');
      if (eq == std::string::npos || eq == 0) {
        throw UsageError("--min-length expects SOURCE=N, got " + item);
      }
      try {
        options.min_length[item.substr(0, eq)] = std::stoi(item.substr(eq + 1));
      } catch (const std::exception &) {
        throw UsageError("--min-length expects SOURCE=N, got " + item);
      }
    }
    options.default_min_length = default_min_length;
    options.normalization.lowercase = lowercase;
    options.normalization.strip_diacritics = strip_diacritics;
    options.priority = priority;
    return options;
  }
};

// ---------------------------------------------------------------------------

struct IngestFlags {
  std::string entity_class;
  std::string language = "yo";
  std::string endpoint;
  std::string out;
  std::string fixture;
  std::string record;
  bool live = false;
  int page_size = 1000;
  std::int64_t max_results = 0;
};

int RunIngest(const IngestFlags &flags) {
  EntityQuery query;
  query.entity_class = ParseEntityClass(flags.entity_class);
  query.language_code = flags.language;
  if (!flags.endpoint.empty()) {
    query.endpoint_url = flags.endpoint;
  } else if (const char *env = std::getenv(std::string(kEndpointEnvironmentVariable).c_str())) {
    query.endpoint_url = env;
  }
  query.page_size = flags.page_size;
  if (flags.max_results > 0) query.max_results = flags.max_results;
  query.Validate();

  if (flags.fixture.empty() == !flags.live) {
    throw UsageError("choose exactly one of --fixture or --live");
  }
  if (!flags.record.empty() && !flags.live) {
    throw UsageError("--record needs --live");
  }
  FetchResult result;
  if (!flags.fixture.empty()) {
    FixtureTransport transport = FixtureTransport::Load(flags.fixture);
    FetchOptions options;
    options.min_interval = std::chrono::milliseconds(0);
    options.backoff_base = std::chrono::milliseconds(0);
    result = FetchEntities(query, transport, options);
  } else {
    LiveTransport live;
    RecordingTransport recorder(live);
    result = FetchEntities(query, recorder);
    if (!flags.record.empty()) recorder.Save(flags.record);
  }
  WriteEntityTsv(result.entries, flags.out);
  std::cerr << "wrote " << result.entries.size() << " entries to " << flags.out
            << " (" << result.requests << " requests"
            << (result.truncated ? ", truncated" : "") << ")\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct AnnotateFlags {
  std::string corpus;
  std::string out;
  std::string scheme = "auto";
  std::vector<std::string> types = {"PER", "ORG", "LOC", "DATE"};
  GazetteerFlags gazetteer;
};

int RunAnnotate(const AnnotateFlags &flags) {
  TagSet tags(flags.types);
  Dataset corpus = ReadConll(flags.corpus, SchemeFromName(flags.scheme), tags);
  DistantSupervision supervision = LoadDistantSupervision(
      flags.gazetteer.files, flags.gazetteer.keywords, flags.gazetteer.Options(), tags);
  Dataset distant = supervision.Annotate(corpus);
  WriteConll(distant, flags.out);
  std::cerr << "annotated " << distant.sentences.size() << " sentences with "
            << supervision.gazetteer.size() << " gazetteer entries\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct TrainFlags {
  std::string clean;
  std::string distant;
  std::string pairs;
  std::string method = "baseline-clean";
  std::string config;
  std::string model_out;
  std::string embeddings;
  std::string confusion_out;
  std::string scheme = "auto";
  std::vector<std::string> types = {"PER", "ORG", "LOC", "DATE"};
  std::optional<std::uint64_t> seed;
  std::optional<int> epochs;
  std::optional<int> hidden_size;
  std::optional<double> learning_rate;
  GazetteerFlags gazetteer;
};

int RunTrain(const TrainFlags &flags) {
  MethodOptions options;
  if (!flags.config.empty()) options = LoadExperimentConfig(flags.config).training;
  TaggerConfig &tc = options.noise.tagger;
  if (flags.seed) tc.seed = *flags.seed;
  if (flags.epochs) tc.epochs = *flags.epochs;
  if (flags.hidden_size) tc.hidden_size = *flags.hidden_size;
  if (flags.learning_rate) tc.learning_rate = *flags.learning_rate;

  Method method = ParseMethod(flags.method);
  if (method == Method::kDistantOnly) {
    throw UsageError("distant-only has no model; use annotate");
  }
  TagSet tags(flags.types);
  TagScheme scheme = SchemeFromName(flags.scheme);
  Dataset clean = ReadConll(flags.clean, scheme, tags);
  Dataset distant;
  distant.tag_set = tags;
  if (!flags.distant.empty()) {
    distant = WithProvenance(ReadConll(flags.distant, scheme, tags), Provenance::kDistant);
  }
  if (method != Method::kBaselineClean && flags.distant.empty()) {
    throw UsageError("--method " + flags.method + " needs --distant");
  }
  Dataset pair_source;
  bool needs_pairs = method == Method::kConfusion || method == Method::kCleaning;
  if (!flags.pairs.empty()) {
    pair_source = ReadConll(flags.pairs, scheme, tags);
  } else if (!flags.gazetteer.files.empty()) {
    pair_source = LoadDistantSupervision(flags.gazetteer.files, flags.gazetteer.keywords,
                                         flags.gazetteer.Options(), tags)
                      .Annotate(clean);
  } else if (needs_pairs) {
    throw UsageError("--method " + flags.method +
                     " needs --pairs or --gazetteer to relabel the clean data");
  }
  EmbeddingTable table = EmbeddingTable::Load(flags.embeddings);

  TaggerModel model{tags, {}};
  std::optional<ConfusionMatrix> channel;
  if (method == Method::kConfusion && distant.TokenCount() > 0) {
    auto result = TrainConfusionMethod(clean, distant, pair_source, options.noise, table);
    model.params = std::move(result.params);
    channel = result.learned;
  } else if (method == Method::kNoiseChannel && distant.TokenCount() > 0 &&
             options.noise_channel_mixed) {
    auto result = EmNoiseChannel(distant, &clean, options.noise, table);
    model.params = std::move(result.params);
    channel = result.state.channel;
  } else {
    model.params = TrainWithMethod(method, clean, distant, pair_source, options, table);
  }
  SaveModel(model, flags.model_out);
  if (!flags.confusion_out.empty()) {
    if (!channel) throw UsageError("--confusion-out needs a channel-based method");
    WriteConfusion(*channel, tags, flags.confusion_out);
  }
  std::cerr << "saved " << flags.model_out << " (" << model.params.size()
            << " parameters)\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct EvaluateFlags {
  std::string gold;
  std::string pred;
  std::string model;
  std::string embeddings;
  std::string csv;
  std::string scheme = "auto";
  std::vector<std::string> types = {"PER", "ORG", "LOC", "DATE"};
};

int RunEvaluate(const EvaluateFlags &flags) {
  if (flags.pred.empty() == flags.model.empty()) {
    throw UsageError("give exactly one of --pred or --model");
  }
  if (!flags.model.empty() && flags.embeddings.empty()) {
    throw UsageError("--model needs --embeddings");
  }
  TagScheme scheme = SchemeFromName(flags.scheme);
  TagSet tags(flags.types);
  Dataset prediction;
  Dataset gold;
  if (!flags.pred.empty()) {
    gold = ReadConll(flags.gold, scheme, tags);
    prediction = ReadConll(flags.pred, scheme, tags);
  } else {
    TaggerModel model = LoadModel(flags.model);
    gold = ReadConll(flags.gold, scheme, model.tags);
    EmbeddingTable table = EmbeddingTable::Load(flags.embeddings);
    prediction = Predict(gold, model.params, table);
  }
  RunMetrics metrics = SpanPrf(gold, prediction);
  std::cout << FormatReport(metrics);
  if (!flags.csv.empty()) WriteMetricsCsv(metrics, flags.csv);
  return 0;
}

struct QualityFlags {
  std::string gold;
  std::string distant;
  std::string scheme = "auto";
  std::vector<std::string> types = {"PER", "ORG", "LOC", "DATE"};
};

int RunQuality(const QualityFlags &flags) {
  TagSet tags(flags.types);
  TagScheme scheme = SchemeFromName(flags.scheme);
  RunMetrics metrics = AnnotationQuality(ReadConll(flags.gold, scheme, tags),
                                         ReadConll(flags.distant, scheme, tags));
  std::cout << FormatReport(metrics);
  return 0;
}

// ---------------------------------------------------------------------------

struct InspectFlags {
  std::string model;
  std::string confusion;
};

void PrintMatrix(const std::vector<std::string> &labels, const Eigen::MatrixXd &m) {
  std::printf("%-8s", "");
  for (const auto &label : labels) std::printf(" %8s", label.c_str());
  std::printf("\n");
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    std::printf("%-8s", labels[r].c_str());
    for (Eigen::Index c = 0; c < m.cols(); ++c) std::printf(" %8.4f", m(r, c));
    std::printf("\n");
  }
}

int RunInspect(const InspectFlags &flags) {
  if (flags.model.empty() == flags.confusion.empty()) {
    throw UsageError("give exactly one of --model or --confusion");
  }
  if (!flags.confusion.empty()) {
    auto [labels, channel] = ReadConfusion(flags.confusion);
    std::printf("confusion matrix, rows = true label, columns = observed label\n");
    PrintMatrix(labels, channel.matrix());
    return 0;
  }
  TaggerModel model = LoadModel(flags.model);
  const TaggerShape &shape = model.params.shape();
  std::printf("labels:");
  for (int k = 0; k < model.tags.label_count(); ++k) {
    std::printf(" %s", std::string(model.tags.LabelName(k)).c_str());
  }
  std::printf("\ncell: %s\n", std::string(CellTypeName(shape.cell)).c_str());
  std::printf("input size: %d\nhidden size: %d\nfeature size: %d\n", shape.input_size,
              shape.hidden_size, shape.feature_size);
  std::printf("fine-tuned embedding rows: %d\n", shape.embedding_rows);
  std::printf("parameters: %d\n", model.params.size());
  for (const auto &block : model.params.blocks()) {
    double norm =
        model.params.values().segment(block.offset, block.rows * block.cols).norm();
    std::printf("  %-18s %5d x %-5d norm %.6g\n", block.name.c_str(), block.rows,
                block.cols, norm);
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct ExperimentFlags {
  std::string config;
  std::optional<int> repeats;
  std::optional<int> parallel;
  std::string output_dir;
  std::vector<std::string> methods;
  std::vector<std::string> budgets;
};

int RunExperimentCommand(const ExperimentFlags &flags) {
  ExperimentConfig config = LoadExperimentConfig(flags.config);
  if (flags.repeats) config.repeats = *flags.repeats;
  if (flags.parallel) config.parallel = *flags.parallel;
  if (!flags.output_dir.empty()) config.output_dir = flags.output_dir;
  if (!flags.methods.empty()) {
    config.methods.clear();
    for (const auto &m : flags.methods) config.methods.push_back(ParseMethod(m));
  }
  if (!flags.budgets.empty()) {
    config.clean_budgets.clear();
    for (const auto &b : flags.budgets) config.clean_budgets.push_back(ParseBudget(b));
  }
  ExperimentSummary summary = RunExperiment(config);
  std::cerr << "ran " << summary.completed << " cells, reused " << summary.skipped
            << ", failed " << summary.failed << "\n"
            << summary.runs_csv << "\n"
            << summary.aggregate_csv << "\n";
  return 0;
}

struct SynthFlags {
  std::string out;
  std::uint64_t seed = 2020;
};

int RunSynth(const SynthFlags &flags) {
  PipelineCorpusOptions options;
  options.seed = flags.seed;
  WritePipelineCorpus(MakePipelineCorpus(options), flags.out);
  std::cerr << "wrote synthetic corpus to " << flags.out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Weakly supervised named entity recognition toolkit"};
  app.require_subcommand(1);

  IngestFlags ingest;
  auto *ingest_cmd = app.add_subcommand("ingest", "Download an entity list from a SPARQL endpoint");
  ingest_cmd->add_option("--class", ingest.entity_class, "person, organization or location")
      ->required()
      ->check(CLI::IsMember({"person", "organization", "location"}));
  ingest_cmd->add_option("--lang", ingest.language, "Label language code");
  ingest_cmd->add_option("--endpoint", ingest.endpoint,
                         "SPARQL endpoint (default: $WSNER_SPARQL_ENDPOINT or Wikidata)");
  ingest_cmd->add_option("--out", ingest.out, "Output entity TSV")->required();
  ingest_cmd->add_option("--fixture", ingest.fixture, "Replay recorded responses")
      ->check(CLI::ExistingFile);
  ingest_cmd->add_flag("--live", ingest.live, "Query the network");
  ingest_cmd->add_option("--record", ingest.record, "Save live responses as a fixture");
  ingest_cmd->add_option("--page-size", ingest.page_size, "Rows per request");
  ingest_cmd->add_option("--max-results", ingest.max_results, "Stop after this many labels");

  AnnotateFlags annotate;
  auto *annotate_cmd = app.add_subcommand("annotate", "Label a corpus with gazetteers and date rules");
  annotate_cmd->add_option("--corpus", annotate.corpus, "CoNLL corpus (tags ignored)")
      ->required()
      ->check(CLI::ExistingFile);
  annotate_cmd->add_option("--out", annotate.out, "Output CoNLL file")->required();
  annotate_cmd->add_option("--scheme", annotate.scheme)->check(CLI::IsMember(kSchemes));
  annotate_cmd->add_option("--types", annotate.types, "Entity types");
  annotate.gazetteer.Register(annotate_cmd, true);

  TrainFlags train;
  auto *train_cmd = app.add_subcommand("train", "Train a tagger and save a checkpoint");
  train_cmd->add_option("--clean", train.clean, "Gold CoNLL training data")
      ->required()
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--distant", train.distant, "Distantly labelled CoNLL data")
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--pairs", train.pairs,
                        "Distant labels of the clean data (confusion, cleaning)")
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--method", train.method)
      ->check(CLI::IsMember({"baseline-clean", "naive-mix", "confusion", "noise-channel",
                             "cleaning"}));
  train_cmd->add_option("--config", train.config, "JSON file with training settings")
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--model-out", train.model_out, "Checkpoint path")->required();
  train_cmd->add_option("--embeddings", train.embeddings, "Word vectors")
      ->required()
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--confusion-out", train.confusion_out, "Write the learned channel");
  train_cmd->add_option("--scheme", train.scheme)->check(CLI::IsMember(kSchemes));
  train_cmd->add_option("--types", train.types, "Entity types");
  train_cmd->add_option("--seed", train.seed);
  train_cmd->add_option("--epochs", train.epochs)->check(CLI::PositiveNumber);
  train_cmd->add_option("--hidden-size", train.hidden_size)->check(CLI::PositiveNumber);
  train_cmd->add_option("--learning-rate", train.learning_rate)->check(CLI::PositiveNumber);
  train.gazetteer.Register(train_cmd, false);

  EvaluateFlags evaluate;
  auto *evaluate_cmd = app.add_subcommand("evaluate", "Span precision, recall and F1");
  evaluate_cmd->add_option("--gold", evaluate.gold)->required()->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--pred", evaluate.pred)->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--model", evaluate.model)->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--embeddings", evaluate.embeddings)->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--csv", evaluate.csv, "Also write metrics as CSV");
  evaluate_cmd->add_option("--scheme", evaluate.scheme)->check(CLI::IsMember(kSchemes));
  evaluate_cmd->add_option("--types", evaluate.types, "Entity types");

  QualityFlags quality;
  auto *quality_cmd = app.add_subcommand("quality", "Score distant labels against gold");
  quality_cmd->add_option("--gold", quality.gold)->required()->check(CLI::ExistingFile);
  quality_cmd->add_option("--distant", quality.distant)->required()->check(CLI::ExistingFile);
  quality_cmd->add_option("--scheme", quality.scheme)->check(CLI::IsMember(kSchemes));
  quality_cmd->add_option("--types", quality.types, "Entity types");

  InspectFlags inspect;
  auto *inspect_cmd = app.add_subcommand("inspect", "Describe a checkpoint or confusion matrix");
  inspect_cmd->add_option("--model", inspect.model)->check(CLI::ExistingFile);
  inspect_cmd->add_option("--confusion", inspect.confusion)->check(CLI::ExistingFile);

  ExperimentFlags experiment;
  auto *experiment_cmd = app.add_subcommand("experiment", "Run a clean-size by method sweep");
  experiment_cmd->add_option("--config", experiment.config)->required()->check(CLI::ExistingFile);
  experiment_cmd->add_option("--repeats", experiment.repeats)->check(CLI::PositiveNumber);
  experiment_cmd->add_option("--parallel", experiment.parallel)->check(CLI::PositiveNumber);
  experiment_cmd->add_option("--output-dir", experiment.output_dir);
  experiment_cmd->add_option("--methods", experiment.methods);
  experiment_cmd->add_option("--budgets", experiment.budgets);

  SynthFlags synth;
  auto *synth_cmd = app.add_subcommand("synth", "Write the synthetic demo corpus");
  synth_cmd->add_option("--out", synth.out)->required();
  synth_cmd->add_option("--seed", synth.seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return 2;
  }

  try {
    if (ingest_cmd->parsed()) return RunIngest(ingest);
    if (annotate_cmd->parsed()) return RunAnnotate(annotate);
    if (train_cmd->parsed()) return RunTrain(train);
    if (evaluate_cmd->parsed()) return RunEvaluate(evaluate);
    if (quality_cmd->parsed()) return RunQuality(quality);
    if (inspect_cmd->parsed()) return RunInspect(inspect);
    if (experiment_cmd->parsed()) return RunExperimentCommand(experiment);
    if (synth_cmd->parsed()) return RunSynth(synth);
  } catch (const UsageError &e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
