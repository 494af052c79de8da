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

// Python bindings. Sentences cross the boundary as (tokens, spans) pairs
// with spans as (type, start, end) tuples.

#include <algorithm>
#include <tuple>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "wsner/corpus.h"
#include "wsner/date_rules.h"
#include "wsner/errors.h"
#include "wsner/eval.h"
#include "wsner/experiment.h"
#include "wsner/gazetteer.h"
#include "wsner/noise.h"
#include "wsner/synthetic.h"
#include "wsner/tagger.h"
#include "wsner/text.h"

namespace py = pybind11;

namespace wsner {
namespace {

using PySpan = std::tuple<std::string, int, int>;
using PySentence = std::pair<std::vector<std::string>, std::vector<PySpan>>;

Dataset MakeDataset(const std::vector<PySentence> &sentences,
                    const std::vector<std::string> &types) {
  Dataset dataset;
  dataset.tag_set = TagSet(types);
  for (const auto &[tokens, spans] : sentences) {
    LabeledSentence sentence;
    sentence.tokens = tokens;
    for (const auto &[type, start, end] : spans) sentence.spans.push_back({type, start, end});
    std::sort(sentence.spans.begin(), sentence.spans.end(),
              [](const EntitySpan &a, const EntitySpan &b) {
                return std::tie(a.start, a.end, a.type) < std::tie(b.start, b.end, b.type);
              });
    ValidateSentence(sentence, dataset.tag_set);
    dataset.sentences.push_back(std::move(sentence));
  }
  return dataset;
}

std::vector<PySentence> DatasetToList(const Dataset &dataset) {
  std::vector<PySentence> out;
  for (const auto &sentence : dataset.sentences) {
    std::vector<PySpan> spans;
    for (const auto &span : sentence.spans) spans.emplace_back(span.type, span.start, span.end);
    out.emplace_back(sentence.tokens, std::move(spans));
  }
  return out;
}

TagScheme Scheme(const std::string &name) {
  if (name == "bio") return TagScheme::kBio;
  if (name == "io") return TagScheme::kIo;
  if (name == "auto") return TagScheme::kAuto;
  throw SchemaError("scheme must be bio, io or auto");
}

py::dict PrfDict(const Prf &prf) {
  py::dict d;
  d["precision"] = prf.precision;
  d["recall"] = prf.recall;
  d["f1"] = prf.f1;
  d["true_positives"] = prf.true_positives;
  d["predicted"] = prf.predicted;
  d["gold"] = prf.gold;
  return d;
}

py::dict MetricsDict(const RunMetrics &metrics) {
  py::dict per_class;
  for (const auto &[type, prf] : metrics.per_class) per_class[py::str(type)] = PrfDict(prf);
  py::dict d;
  d["per_class"] = per_class;
  d["overall"] = PrfDict(metrics.overall);
  return d;
}

const std::vector<std::string> kDefaultTypes = {"PER", "ORG", "LOC", "DATE"};

}  // namespace
}  // namespace wsner

PYBIND11_MODULE(_core, m) {
  using namespace wsner;
  m.doc() = "Weakly supervised named entity recognition";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", error.ptr());
  py::register_exception<SchemaError>(m, "SchemaError", error.ptr());
  py::register_exception<NumericError>(m, "NumericError", error.ptr());
  py::register_exception<AlignmentError>(m, "AlignmentError", error.ptr());
  py::register_exception<EstimationError>(m, "EstimationError", error.ptr());

  py::class_<Dataset>(m, "Dataset")
      .def(py::init(&MakeDataset), py::arg("sentences"),
           py::arg("entity_types") = kDefaultTypes)
      .def_static(
          "read_conll",
          [](const std::string &path, const std::string &scheme,
             const std::vector<std::string> &types) {
            return ReadConll(path, Scheme(scheme), TagSet(types));
          },
          py::arg("path"), py::arg("scheme") = "auto",
          py::arg("entity_types") = kDefaultTypes)
      .def("write_conll", [](const Dataset &d, const std::string &path) { WriteConll(d, path); })
      .def("sentences", &DatasetToList)
      .def("token_count", &Dataset::TokenCount)
      .def("subsample", &SubsampleTokens, py::arg("budget"), py::arg("seed"))
      .def_property_readonly("entity_types",
                             [](const Dataset &d) { return d.tag_set.entity_types(); })
      .def("__len__", [](const Dataset &d) { return d.sentences.size(); })
      .def("__eq__", [](const Dataset &a, const Dataset &b) { return a == b; });

  py::class_<DateRuleSet>(m, "DateRules")
      .def(py::init<const std::vector<std::string> &, bool>(), py::arg("keywords"),
           py::arg("digit_rule") = true)
      .def_static("default", &DateRuleSet::Default)
      .def_static("from_file", &DateRuleSet::FromFile, py::arg("path"),
                  py::arg("digit_rule") = true)
      .def("mark", [](const DateRuleSet &r, const std::vector<std::string> &tokens) {
        return r.Mark(tokens);
      })
      .def("annotate", [](const DateRuleSet &r, const std::vector<std::string> &tokens) {
        std::vector<PySpan> out;
        for (const auto &s : r.Annotate(tokens)) out.emplace_back(s.type, s.start, s.end);
        return out;
      });

  py::class_<Gazetteer>(m, "Gazetteer")
      .def_static(
          "build",
          [](const std::vector<std::tuple<std::string, std::string, std::string>> &entries,
             const std::map<std::string, int> &min_length, int default_min_length,
             bool lowercase, bool strip_diacritics,
             const std::vector<std::string> &types) {
            std::vector<GazetteerEntry> list;
            for (const auto &[surface, type, source] : entries) {
              list.push_back({Split(surface, ' '), type, source});
            }
            GazetteerOptions options;
            options.min_length = min_length;
            options.default_min_length = default_min_length;
            options.normalization = {lowercase, strip_diacritics};
            return Gazetteer::Build(list, options, TagSet(types));
          },
          py::arg("entries"), py::arg("min_length") = std::map<std::string, int>(),
          py::arg("default_min_length") = 1, py::arg("lowercase") = false,
          py::arg("strip_diacritics") = false, py::arg("entity_types") = kDefaultTypes)
      .def_static(
          "from_files",
          [](const std::vector<std::string> &paths, const std::map<std::string, int> &min_length,
             const std::vector<std::string> &types) {
            std::vector<GazetteerEntry> list;
            for (const auto &p : paths) {
              auto more = ReadEntityTsv(p);
              list.insert(list.end(), more.begin(), more.end());
            }
            GazetteerOptions options;
            options.min_length = min_length;
            return Gazetteer::Build(list, options, TagSet(types));
          },
          py::arg("paths"), py::arg("min_length") = std::map<std::string, int>(),
          py::arg("entity_types") = kDefaultTypes)
      .def("match",
           [](const Gazetteer &g, const std::vector<std::string> &tokens) {
             std::vector<PySpan> out;
             for (const auto &s : g.Match(tokens)) out.emplace_back(s.type, s.start, s.end);
             return out;
           })
      .def("__len__", &Gazetteer::size);

  m.def(
      "annotate_distant",
      [](const Dataset &dataset, const Gazetteer &gazetteer, const DateRuleSet *dates) {
        return AnnotateDistant(dataset, gazetteer, dates);
      },
      py::arg("dataset"), py::arg("gazetteer"), py::arg("date_rules") = nullptr);

  m.def("span_prf", [](const Dataset &g, const Dataset &p) { return MetricsDict(SpanPrf(g, p)); },
        py::arg("gold"), py::arg("pred"));
  m.def("annotation_quality",
        [](const Dataset &g, const Dataset &d) { return MetricsDict(AnnotationQuality(g, d)); },
        py::arg("gold"), py::arg("distant"));
  m.def(
      "mean_standard_error",
      [](const std::vector<double> &values) {
        MeanSe s = MeanStandardError(values);
        return std::make_pair(s.mean, s.standard_error);
      },
      py::arg("values"));

  py::class_<EmbeddingTable>(m, "Embeddings")
      .def(py::init<const std::vector<std::string> &, const RowMatrix &>(), py::arg("words"),
           py::arg("vectors"))
      .def_static("load", &EmbeddingTable::Load)
      .def("save", &EmbeddingTable::Save)
      .def("lookup", &EmbeddingTable::Lookup)
      .def_property_readonly("dimension", &EmbeddingTable::dimension)
      .def("__len__", &EmbeddingTable::size);

  py::class_<TaggerConfig>(m, "TaggerConfig")
      .def(py::init<>())
      .def_readwrite("hidden_size", &TaggerConfig::hidden_size)
      .def_readwrite("feature_size", &TaggerConfig::feature_size)
      .def_readwrite("learning_rate", &TaggerConfig::learning_rate)
      .def_readwrite("epochs", &TaggerConfig::epochs)
      .def_readwrite("seed", &TaggerConfig::seed)
      .def_readwrite("fine_tune_embeddings", &TaggerConfig::fine_tune_embeddings)
      .def_property(
          "cell", [](const TaggerConfig &c) { return std::string(CellTypeName(c.cell)); },
          [](TaggerConfig &c, const std::string &name) { c.cell = ParseCellType(name); });

  py::class_<TaggerModel>(m, "Tagger")
      .def_static("load", [](const std::string &path) { return LoadModel(path); })
      .def("save", [](const TaggerModel &t, const std::string &path) { SaveModel(t, path); })
      .def("predict",
           [](const TaggerModel &t, const Dataset &d, const EmbeddingTable &table) {
             return Predict(d, t.params, table);
           })
      .def("parameters", [](const TaggerModel &t) { return t.params.values(); })
      .def_property_readonly("parameter_count",
                             [](const TaggerModel &t) { return t.params.size(); });

  m.def(
      "train",
      [](const std::string &method, const Dataset &clean, const Dataset *distant,
         const Dataset *pair_source, const TaggerConfig &config,
         const EmbeddingTable &table) {
        MethodOptions options;
        options.noise.tagger = config;
        Dataset none;
        none.tag_set = clean.tag_set;
        TaggerModel model{clean.tag_set, {}};
        py::gil_scoped_release release;
        model.params = TrainWithMethod(ParseMethod(method), clean, distant ? *distant : none,
                                       pair_source ? *pair_source : none, options, table);
        return model;
      },
      py::arg("method"), py::arg("clean"), py::arg("distant") = nullptr,
      py::arg("pair_source") = nullptr, py::arg("config") = TaggerConfig(),
      py::arg("embeddings"));

  m.def(
      "estimate_confusion",
      [](const std::vector<std::pair<int, int>> &pairs, int label_count, double smoothing) {
        return EstimateConfusion(pairs, label_count, smoothing).matrix();
      },
      py::arg("pairs"), py::arg("label_count"), py::arg("smoothing") = 1.0);

  m.def(
      "run_experiment",
      [](const std::string &config_path, std::optional<int> repeats,
         std::optional<std::string> output_dir) {
        ExperimentConfig config = LoadExperimentConfig(config_path);
        if (repeats) config.repeats = *repeats;
        if (output_dir) config.output_dir = *output_dir;
        py::gil_scoped_release release;
        ExperimentSummary s = RunExperiment(config);
        return std::make_pair(s.runs_csv, s.aggregate_csv);
      },
      py::arg("config"), py::arg("repeats") = py::none(), py::arg("output_dir") = py::none());

  m.def(
      "write_synthetic_corpus",
      [](const std::string &directory, std::uint64_t seed) {
        PipelineCorpusOptions options;
        options.seed = seed;
        WritePipelineCorpus(MakePipelineCorpus(options), directory);
      },
      py::arg("directory"), py::arg("seed") = 2020);
}
