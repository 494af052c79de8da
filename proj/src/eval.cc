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

#include "wsner/eval.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "wsner/errors.h"

namespace wsner {

Prf Prf::FromCounts(std::int64_t true_positives, std::int64_t predicted,
                    std::int64_t gold) {
  Prf prf;
  prf.true_positives = true_positives;
  prf.predicted = predicted;
  prf.gold = gold;
  prf.precision = predicted == 0 ? 0.0 : double(true_positives) / predicted;
  prf.recall = gold == 0 ? 0.0 : double(true_positives) / gold;
  double sum = prf.precision + prf.recall;
  prf.f1 = sum == 0.0 ? 0.0 : 2.0 * prf.precision * prf.recall / sum;
  return prf;
}

const Prf &RunMetrics::ForClass(const std::string &type) const {
  for (const auto &[name, prf] : per_class) {
    if (name == type) return prf;
  }
  throw SchemaError("no metrics for class \"" + type + "\"");
}

RunMetrics SpanPrf(const Dataset &gold, const Dataset &pred) {
  if (gold.sentences.size() != pred.sentences.size()) {
    throw AlignmentError(
        static_cast<int>(std::min(gold.sentences.size(), pred.sentences.size())),
        "datasets have " + std::to_string(gold.sentences.size()) + " and " +
            std::to_string(pred.sentences.size()) + " sentences");
  }
  const auto &types = gold.tag_set.entity_types();
  std::vector<std::int64_t> tp(types.size()), predicted(types.size()),
      expected(types.size());
  auto type_of = [&](const std::string &type) {
    int index = gold.tag_set.TypeIndex(type);
    if (index < 0) throw SchemaError("unknown entity type \"" + type + "\"");
    return index;
  };

  for (size_t s = 0; s < gold.sentences.size(); ++s) {
    const auto &g = gold.sentences[s];
    const auto &p = pred.sentences[s];
    if (g.tokens.size() != p.tokens.size()) {
      throw AlignmentError(static_cast<int>(s),
                           "token counts differ (" + std::to_string(g.size()) +
                               " vs " + std::to_string(p.size()) + ")");
    }
    std::set<EntitySpan> gold_spans(g.spans.begin(), g.spans.end());
    for (const auto &span : g.spans) ++expected[type_of(span.type)];
    for (const auto &span : p.spans) {
      int type = type_of(span.type);
      ++predicted[type];
      if (gold_spans.count(span) > 0) ++tp[type];
    }
  }

  RunMetrics metrics;
  std::int64_t all_tp = 0, all_predicted = 0, all_gold = 0;
  for (size_t t = 0; t < types.size(); ++t) {
    metrics.per_class.emplace_back(types[t],
                                   Prf::FromCounts(tp[t], predicted[t], expected[t]));
    all_tp += tp[t];
    all_predicted += predicted[t];
    all_gold += expected[t];
  }
  metrics.overall = Prf::FromCounts(all_tp, all_predicted, all_gold);
  return metrics;
}

RunMetrics AnnotationQuality(const Dataset &gold, const Dataset &distant) {
  return SpanPrf(gold, distant);
}

MeanSe MeanStandardError(std::span<const double> values) {
  if (values.empty()) throw Error("cannot aggregate zero runs");
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  MeanSe out;
  out.mean = sum / n;
  if (values.size() > 1) {
    double squares = 0.0;
    for (double v : values) squares += (v - out.mean) * (v - out.mean);
    out.standard_error = std::sqrt(squares / (n - 1.0)) / std::sqrt(n);
  }
  return out;
}

std::vector<std::pair<std::string, double>> FlattenMetrics(
    const RunMetrics &metrics) {
  std::vector<std::pair<std::string, double>> out;
  auto add = [&out](const std::string &prefix, const Prf &prf) {
    out.emplace_back(prefix + ".precision", prf.precision);
    out.emplace_back(prefix + ".recall", prf.recall);
    out.emplace_back(prefix + ".f1", prf.f1);
  };
  for (const auto &[type, prf] : metrics.per_class) add(type, prf);
  add("overall", metrics.overall);
  return out;
}

std::vector<std::pair<std::string, MeanSe>> Aggregate(
    std::span<const RunMetrics> runs) {
  if (runs.empty()) throw Error("cannot aggregate zero runs");
  auto names = FlattenMetrics(runs[0]);
  std::vector<std::vector<double>> columns(names.size());
  for (const auto &run : runs) {
    auto flat = FlattenMetrics(run);
    if (flat.size() != names.size()) {
      throw Error("runs disagree on the set of classes");
    }
    for (size_t i = 0; i < flat.size(); ++i) {
      if (flat[i].first != names[i].first) {
        throw Error("runs disagree on the set of classes");
      }
      columns[i].push_back(flat[i].second);
    }
  }
  std::vector<std::pair<std::string, MeanSe>> out;
  for (size_t i = 0; i < names.size(); ++i) {
    out.emplace_back(names[i].first, MeanStandardError(columns[i]));
  }
  return out;
}

std::string FormatReport(const RunMetrics &metrics) {
  auto pct = [](double v) { return static_cast<int>(std::lround(100.0 * v)); };
  std::string out;
  char line[128];
  std::snprintf(line, sizeof(line), "%-10s %5s %5s %5s %7s %7s %7s\n", "Class",
                "P", "R", "F1", "tp", "pred", "gold");
  out += line;
  auto row = [&](const std::string &name, const Prf &prf) {
    std::snprintf(line, sizeof(line), "%-10s %5d %5d %5d %7lld %7lld %7lld\n",
                  name.c_str(), pct(prf.precision), pct(prf.recall), pct(prf.f1),
                  static_cast<long long>(prf.true_positives),
                  static_cast<long long>(prf.predicted),
                  static_cast<long long>(prf.gold));
    out += line;
  };
  row("Overall", metrics.overall);
  for (const auto &[type, prf] : metrics.per_class) row(type, prf);
  return out;
}

}  // namespace wsner
