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

#include "wsner/experiment.h"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "wsner/errors.h"
#include "wsner/text.h"

namespace wsner {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

const std::vector<std::pair<Method, std::string_view>> kMethodNames = {
    {Method::kBaselineClean, "baseline-clean"},
    {Method::kNaiveMix, "naive-mix"},
    {Method::kConfusion, "confusion"},
    {Method::kNoiseChannel, "noise-channel"},
    {Method::kCleaning, "cleaning"},
    {Method::kDistantOnly, "distant-only"},
};

}  // namespace

std::string_view MethodName(Method method) {
  for (const auto &[m, name] : kMethodNames) {
    if (m == method) return name;
  }
  return "unknown";
}

Method ParseMethod(std::string_view name) {
  for (const auto &[m, n] : kMethodNames) {
    if (n == name) return m;
  }
  throw SchemaError("unknown method: " + std::string(name));
}

const std::vector<Method> &AllMethods() {
  static const std::vector<Method> methods = [] {
    std::vector<Method> all;
    for (const auto &entry : kMethodNames) all.push_back(entry.first);
    return all;
  }();
  return methods;
}

Dataset DistantSupervision::Annotate(const Dataset &dataset) const {
  return AnnotateDistant(dataset, gazetteer, date_rules ? &*date_rules : nullptr);
}

DistantSupervision LoadDistantSupervision(const std::vector<std::string> &gazetteers,
                                          const std::string &keywords,
                                          const GazetteerOptions &options,
                                          const TagSet &tags) {
  std::vector<GazetteerEntry> entries;
  for (const auto &path : gazetteers) {
    auto more = ReadEntityTsv(path);
    entries.insert(entries.end(), more.begin(), more.end());
  }
  DistantSupervision result{Gazetteer::Build(entries, options, tags), std::nullopt};
  if (tags.HasType("DATE")) {
    result.date_rules =
        keywords.empty() ? DateRuleSet::Default() : DateRuleSet::FromFile(keywords);
  }
  return result;
}

TaggerParams TrainWithMethod(Method method, const Dataset &clean,
                             const Dataset &distant, const Dataset &pair_source,
                             const MethodOptions &options,
                             const EmbeddingTable &table) {
  const TaggerConfig &tc = options.noise.tagger;
  if (method == Method::kDistantOnly) {
    throw Error("distant-only does not train a model");
  }
  if (method == Method::kBaselineClean || distant.TokenCount() == 0) {
    return Train(clean, tc, table);
  }
  switch (method) {
    case Method::kNaiveMix:
      return TrainNaiveMix(clean, distant, tc, table);
    case Method::kConfusion:
      return TrainConfusionMethod(clean, distant, pair_source, options.noise, table)
          .params;
    case Method::kNoiseChannel: {
      if (options.noise_channel_mixed) {
        return EmNoiseChannel(distant, &clean, options.noise, table).params;
      }
      Dataset noisy = clean;
      noisy.sentences.insert(noisy.sentences.end(), distant.sentences.begin(),
                             distant.sentences.end());
      return EmNoiseChannel(noisy, nullptr, options.noise, table).params;
    }
    case Method::kCleaning:
      return TrainCleaningMethod(clean, distant, pair_source, options.noise, table)
          .params;
    default:
      break;
  }
  throw Error("unhandled method");
}

// ---------------------------------------------------------------------------
// Configuration

std::string BudgetName(std::int64_t budget) {
  return budget == kUnlimitedBudget ? "unlimited" : std::to_string(budget);
}

std::int64_t ParseBudget(std::string_view text) {
  if (text == "unlimited") return kUnlimitedBudget;
  std::int64_t value = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size() || value <= 0) {
    throw SchemaError("bad clean budget: " + std::string(text));
  }
  return value;
}

void ExperimentConfig::Validate() const {
  if (clean_budgets.empty()) throw SchemaError("clean_budgets is empty");
  for (size_t i = 0; i < clean_budgets.size(); ++i) {
    if (clean_budgets[i] <= 0) throw SchemaError("clean budgets must be positive");
    if (i > 0 && clean_budgets[i] <= clean_budgets[i - 1]) {
      throw SchemaError("clean_budgets must be strictly increasing");
    }
  }
  if (methods.empty()) throw SchemaError("methods is empty");
  for (size_t i = 0; i < methods.size(); ++i) {
    if (std::count(methods.begin(), methods.end(), methods[i]) > 1) {
      throw SchemaError("duplicate method: " + std::string(MethodName(methods[i])));
    }
  }
  if (repeats < 1) throw SchemaError("repeats must be at least 1");
  if (parallel < 1) throw SchemaError("parallel must be at least 1");
  if (output_dir.empty()) throw SchemaError("output_dir is empty");
  TagSet tags(entity_types);
  try {
    training.noise.tagger.Validate();
  } catch (const SchemaError &) {
    throw;
  } catch (const Error &e) {
    throw SchemaError(e.what());
  }
  if (training.noise.em_iterations < 1) throw SchemaError("em_iterations must be positive");
  if (training.noise.smoothing < 0) throw SchemaError("smoothing must be non-negative");

  auto require = [](const std::string &path, const char *key) {
    if (path.empty()) throw SchemaError(std::string("missing ") + key);
    if (!fs::is_regular_file(path)) {
      throw SchemaError(std::string(key) + " does not exist: " + path);
    }
  };
  require(train, "train");
  require(test, "test");
  require(embeddings, "embeddings");
  for (const auto &path : extra_distant) require(path, "extra_distant");
  for (const auto &path : gazetteers) require(path, "gazetteers");
  if (!keywords.empty()) require(keywords, "keywords");
}

namespace {

std::string ResolvePath(const std::string &path, const std::string &base_dir) {
  if (path.empty() || fs::path(path).is_absolute()) return path;
  return (fs::path(base_dir) / path).lexically_normal().string();
}

template <typename T>
T Get(const json &value, const std::string &key) {
  try {
    return value.get<T>();
  } catch (const json::exception &) {
    throw SchemaError("config key '" + key + "' has the wrong type");
  }
}

}  // namespace

ExperimentConfig ParseExperimentConfig(std::string_view text,
                                       const std::string &base_dir) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error &e) {
    throw ParseError("", 0, e.what());
  }
  if (!doc.is_object()) throw SchemaError("config must be a JSON object");

  ExperimentConfig config;
  NoiseConfig &noise = config.training.noise;
  TaggerConfig &tagger = noise.tagger;
  auto path = [&](const json &v, const std::string &key) {
    return ResolvePath(Get<std::string>(v, key), base_dir);
  };
  auto paths = [&](const json &v, const std::string &key) {
    std::vector<std::string> out;
    for (const auto &p : Get<std::vector<std::string>>(v, key)) {
      out.push_back(ResolvePath(p, base_dir));
    }
    return out;
  };

  for (const auto &[key, v] : doc.items()) {
    if (key == "clean_budgets") {
      if (!v.is_array()) throw SchemaError("clean_budgets must be a list");
      config.clean_budgets.clear();
      for (const auto &b : v) {
        if (b.is_string()) {
          config.clean_budgets.push_back(ParseBudget(b.get<std::string>()));
        } else if (b.is_number_integer()) {
          config.clean_budgets.push_back(b.get<std::int64_t>());
        } else {
          throw SchemaError("clean_budgets entries must be integers or \"unlimited\"");
        }
      }
    } else if (key == "methods") {
      config.methods.clear();
      for (const auto &m : Get<std::vector<std::string>>(v, key)) {
        config.methods.push_back(ParseMethod(m));
      }
    } else if (key == "repeats") {
      config.repeats = Get<int>(v, key);
    } else if (key == "base_seed") {
      config.base_seed = Get<std::uint64_t>(v, key);
    } else if (key == "train") {
      config.train = path(v, key);
    } else if (key == "test") {
      config.test = path(v, key);
    } else if (key == "extra_distant") {
      config.extra_distant = paths(v, key);
    } else if (key == "gazetteers") {
      config.gazetteers = paths(v, key);
    } else if (key == "keywords") {
      config.keywords = path(v, key);
    } else if (key == "embeddings") {
      config.embeddings = path(v, key);
    } else if (key == "scheme") {
      auto s = Get<std::string>(v, key);
      if (s == "bio") config.scheme = TagScheme::kBio;
      else if (s == "io") config.scheme = TagScheme::kIo;
      else if (s == "auto") config.scheme = TagScheme::kAuto;
      else throw SchemaError("scheme must be bio, io or auto");
    } else if (key == "entity_types") {
      config.entity_types = Get<std::vector<std::string>>(v, key);
    } else if (key == "min_length") {
      config.gazetteer.min_length = Get<std::map<std::string, int>>(v, key);
    } else if (key == "default_min_length") {
      config.gazetteer.default_min_length = Get<int>(v, key);
    } else if (key == "lowercase") {
      config.gazetteer.normalization.lowercase = Get<bool>(v, key);
    } else if (key == "strip_diacritics") {
      config.gazetteer.normalization.strip_diacritics = Get<bool>(v, key);
    } else if (key == "priority") {
      config.gazetteer.priority = Get<std::vector<std::string>>(v, key);
    } else if (key == "hidden_size") {
      tagger.hidden_size = Get<int>(v, key);
    } else if (key == "feature_size") {
      tagger.feature_size = Get<int>(v, key);
    } else if (key == "learning_rate") {
      tagger.learning_rate = Get<double>(v, key);
    } else if (key == "epochs") {
      tagger.epochs = Get<int>(v, key);
    } else if (key == "cell") {
      try {
        tagger.cell = ParseCellType(Get<std::string>(v, key));
      } catch (const SchemaError &) {
        throw;
      } catch (const Error &e) {
        throw SchemaError(e.what());
      }
    } else if (key == "fine_tune_embeddings") {
      tagger.fine_tune_embeddings = Get<bool>(v, key);
    } else if (key == "smoothing") {
      noise.smoothing = Get<double>(v, key);
    } else if (key == "freeze_channel") {
      noise.freeze_channel = Get<bool>(v, key);
    } else if (key == "em_iterations") {
      noise.em_iterations = Get<int>(v, key);
    } else if (key == "em_warm_start_epochs") {
      noise.em_warm_start_epochs = Get<int>(v, key);
    } else if (key == "em_channel_init") {
      auto s = Get<std::string>(v, key);
      if (s == "identity") noise.em_channel_init = ChannelInit::kIdentity;
      else if (s == "from-model") noise.em_channel_init = ChannelInit::kFromModel;
      else throw SchemaError("em_channel_init must be identity or from-model");
    } else if (key == "noise_channel_mode") {
      auto s = Get<std::string>(v, key);
      if (s == "mixed") config.training.noise_channel_mixed = true;
      else if (s == "all-noisy") config.training.noise_channel_mixed = false;
      else throw SchemaError("noise_channel_mode must be mixed or all-noisy");
    } else if (key == "cleaner_hidden") {
      noise.cleaner_hidden = Get<int>(v, key);
    } else if (key == "cleaner_epochs") {
      noise.cleaner_epochs = Get<int>(v, key);
    } else if (key == "cleaner_learning_rate") {
      noise.cleaner_learning_rate = Get<double>(v, key);
    } else if (key == "output_dir") {
      config.output_dir = path(v, key);
    } else if (key == "parallel") {
      config.parallel = Get<int>(v, key);
    } else {
      throw SchemaError("unknown config key: " + key);
    }
  }
  if (!doc.contains("output_dir")) config.output_dir = ResolvePath("results", base_dir);
  return config;
}

ExperimentConfig LoadExperimentConfig(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path, 0, "cannot open config");
  std::stringstream buffer;
  buffer << in.rdbuf();
  std::string dir = fs::path(path).parent_path().string();
  return ParseExperimentConfig(buffer.str(), dir.empty() ? "." : dir);
}

// ---------------------------------------------------------------------------
// CSV

std::string FormatNumber(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

std::vector<std::string> MetricsHeader(const TagSet &tags) {
  std::vector<std::string> header;
  for (const auto &type : tags.entity_types()) {
    for (const char *m : {"precision", "recall", "f1"}) header.push_back(type + "." + m);
  }
  for (const char *m : {"precision", "recall", "f1"}) {
    header.push_back(std::string("overall.") + m);
  }
  return header;
}

void WriteMetricsCsv(const RunMetrics &metrics, const std::string &path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  out << "metric,value\n";
  for (const auto &[name, value] : FlattenMetrics(metrics)) {
    out << name << ',' << FormatNumber(value) << '\n';
  }
  if (!out) throw Error("failed writing " + path);
}

namespace {

struct Cell {
  int budget_index;
  int method_index;
  int repeat;
};

std::string CellKey(const std::string &budget, const std::string &method,
                    const std::string &repeat) {
  return budget + "," + method + "," + repeat;
}

std::string SanitizeMessage(std::string message) {
  for (char &c : message) {
    if (c == ',' || c == '\n' || c == '\r' || c == '"') c = ' ';
  }
  return message;
}

struct SweepData {
  TagSet tags;
  Dataset train;
  Dataset test;
  Dataset distant;
  Dataset distant_test;
  EmbeddingTable table;
  DistantSupervision supervision;
};

SweepData LoadSweepData(const ExperimentConfig &config) {
  SweepData data;
  data.tags = TagSet(config.entity_types);
  data.train = ReadConll(config.train, config.scheme, data.tags);
  data.test = ReadConll(config.test, config.scheme, data.tags);
  data.table = EmbeddingTable::Load(config.embeddings);
  data.supervision = LoadDistantSupervision(config.gazetteers, config.keywords,
                                            config.gazetteer, data.tags);
  Dataset raw = data.train;
  for (const auto &path : config.extra_distant) {
    Dataset extra = ReadConll(path, config.scheme, data.tags);
    raw.sentences.insert(raw.sentences.end(), extra.sentences.begin(),
                         extra.sentences.end());
  }
  data.distant = data.supervision.Annotate(raw);
  data.distant_test = data.supervision.Annotate(data.test);
  return data;
}

std::string RunCell(const ExperimentConfig &config, const SweepData &data,
                    std::int64_t budget, Method method, std::uint64_t seed) {
  RunMetrics metrics;
  if (method == Method::kDistantOnly) {
    metrics = SpanPrf(data.test, data.distant_test);
  } else {
    Dataset clean = SubsampleTokens(data.train, budget, seed);
    Dataset pair_source = data.supervision.Annotate(clean);
    MethodOptions options = config.training;
    options.noise.tagger.seed = seed;
    TaggerParams params =
        TrainWithMethod(method, clean, data.distant, pair_source, options, data.table);
    metrics = SpanPrf(data.test, Predict(data.test, params, data.table));
  }
  std::string row;
  for (const auto &[name, value] : FlattenMetrics(metrics)) {
    row += ',';
    row += FormatNumber(value);
  }
  return row;
}

std::vector<std::string> SplitCsv(const std::string &line) { return Split(line, ','); }

void WriteLines(const std::string &path, const std::string &header,
                const std::vector<std::string> &rows) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp);
    out << header << '\n';
    for (const auto &row : rows) out << row << '\n';
    out.flush();
    if (!out) throw Error("failed writing " + tmp);
  }
  fs::rename(tmp, path);
}

}  // namespace

ExperimentSummary RunExperiment(const ExperimentConfig &config) {
  config.Validate();
  const TagSet tags(config.entity_types);
  const std::vector<std::string> metric_names = MetricsHeader(tags);
  std::string header = "budget,method,repeat,seed,status";
  for (const auto &name : metric_names) header += "," + name;
  const size_t columns = 5 + metric_names.size();

  fs::create_directories(config.output_dir);
  ExperimentSummary summary;
  summary.runs_csv = (fs::path(config.output_dir) / "runs.csv").string();
  summary.aggregate_csv = (fs::path(config.output_dir) / "aggregate.csv").string();

  const int B = static_cast<int>(config.clean_budgets.size());
  const int M = static_cast<int>(config.methods.size());
  const int R = config.repeats;
  std::vector<Cell> cells;
  std::map<std::string, int> cell_index;
  for (int b = 0; b < B; ++b) {
    for (int m = 0; m < M; ++m) {
      for (int r = 0; r < R; ++r) {
        cell_index[CellKey(BudgetName(config.clean_budgets[b]),
                           std::string(MethodName(config.methods[m])),
                           std::to_string(r))] = static_cast<int>(cells.size());
        cells.push_back({b, m, r});
      }
    }
  }
  std::vector<std::optional<std::string>> rows(cells.size());

  // Resume: keep complete, successful rows of the current grid.
  if (fs::exists(summary.runs_csv)) {
    std::ifstream in(summary.runs_csv, std::ios::binary);
    std::string content((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
    size_t pos = 0;
    bool first = true;
    while (pos < content.size()) {
      size_t end = content.find('\n', pos);
      if (end == std::string::npos) break;  // torn final line
      std::string line = content.substr(pos, end - pos);
      pos = end + 1;
      if (first) {
        if (line != header) {
          throw SchemaError("existing " + summary.runs_csv +
                            " has a different header; use another output_dir");
        }
        first = false;
        continue;
      }
      auto fields = SplitCsv(line);
      if (fields.size() != columns || fields[4] != "ok") continue;
      auto it = cell_index.find(CellKey(fields[0], fields[1], fields[2]));
      if (it == cell_index.end()) continue;
      const Cell &cell = cells[it->second];
      if (fields[3] != std::to_string(config.base_seed + cell.repeat)) continue;
      rows[it->second] = line;
      ++summary.skipped;
    }
  }
  std::vector<std::string> kept;
  for (const auto &row : rows) {
    if (row) kept.push_back(*row);
  }
  WriteLines(summary.runs_csv, header, kept);

  std::vector<int> pending;
  for (size_t i = 0; i < cells.size(); ++i) {
    if (!rows[i]) pending.push_back(static_cast<int>(i));
  }

  if (!pending.empty()) {
    const SweepData data = LoadSweepData(config);
    std::ofstream out(summary.runs_csv, std::ios::binary | std::ios::app);
    std::mutex mutex;
    std::atomic<size_t> next{0};
    auto worker = [&] {
      while (true) {
        size_t k = next.fetch_add(1);
        if (k >= pending.size()) return;
        const Cell &cell = cells[pending[k]];
        const std::int64_t budget = config.clean_budgets[cell.budget_index];
        const Method method = config.methods[cell.method_index];
        const std::uint64_t seed = config.base_seed + cell.repeat;
        std::string prefix = BudgetName(budget) + "," + std::string(MethodName(method)) +
                             "," + std::to_string(cell.repeat) + "," +
                             std::to_string(seed);
        std::string row;
        bool ok = true;
        try {
          row = prefix + ",ok" + RunCell(config, data, budget, method, seed);
        } catch (const std::exception &e) {
          ok = false;
          row = prefix + ",error: " + SanitizeMessage(e.what()) +
                std::string(metric_names.size(), ',');
        }
        std::lock_guard<std::mutex> lock(mutex);
        rows[pending[k]] = row;
        out << row << '\n';
        out.flush();
        ++summary.completed;
        if (!ok) ++summary.failed;
      }
    };
    int threads = std::min<int>(config.parallel, static_cast<int>(pending.size()));
    std::vector<std::thread> pool;
    for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto &thread : pool) thread.join();
  }

  // Canonical order: budgets, then methods, then repeats, as configured.
  std::vector<std::string> final_rows;
  for (const auto &row : rows) final_rows.push_back(*row);
  WriteLines(summary.runs_csv, header, final_rows);

  std::string aggregate_header = "budget,method,runs,failed";
  for (const auto &name : metric_names) {
    aggregate_header += "," + name + ".mean," + name + ".se";
  }
  std::vector<std::string> aggregate_rows;
  for (int b = 0; b < B; ++b) {
    for (int m = 0; m < M; ++m) {
      std::vector<std::vector<double>> values(metric_names.size());
      int failed = 0;
      for (int r = 0; r < R; ++r) {
        auto fields = SplitCsv(*rows[(b * M + m) * R + r]);
        if (fields[4] != "ok") {
          ++failed;
          continue;
        }
        for (size_t j = 0; j < metric_names.size(); ++j) {
          values[j].push_back(std::stod(fields[5 + j]));
        }
      }
      std::string row = BudgetName(config.clean_budgets[b]) + "," +
                        std::string(MethodName(config.methods[m])) + "," +
                        std::to_string(R - failed) + "," + std::to_string(failed);
      for (const auto &column : values) {
        if (column.empty()) {
          row += ",,";
          continue;
        }
        MeanSe stats = MeanStandardError(column);
        row += "," + FormatNumber(stats.mean) + "," + FormatNumber(stats.standard_error);
      }
      aggregate_rows.push_back(row);
    }
  }
  WriteLines(summary.aggregate_csv, aggregate_header, aggregate_rows);
  return summary;
}

}  // namespace wsner
