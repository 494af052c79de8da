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

#ifndef WSNER_EVAL_H_
#define WSNER_EVAL_H_

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wsner/corpus.h"

namespace wsner {

// Precision, recall and F1 from span counts. Each ratio is 0 when its
// denominator is 0.
struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::int64_t true_positives = 0;
  std::int64_t predicted = 0;
  std::int64_t gold = 0;

  static Prf FromCounts(std::int64_t true_positives, std::int64_t predicted,
                        std::int64_t gold);
  bool operator==(const Prf &other) const = default;
};

struct RunMetrics {
  // One entry per entity type, in tag set order.
  std::vector<std::pair<std::string, Prf>> per_class;
  // Micro average over all spans.
  Prf overall;

  const Prf &ForClass(const std::string &type) const;
  bool operator==(const RunMetrics &other) const = default;
};

// Exact (type, start, end) span matching, micro-averaged. Throws
// AlignmentError when sentence or token counts differ.
RunMetrics SpanPrf(const Dataset &gold, const Dataset &pred);

// Scores distant annotations against gold; same computation as SpanPrf.
RunMetrics AnnotationQuality(const Dataset &gold, const Dataset &distant);

struct MeanSe {
  double mean = 0.0;
  double standard_error = 0.0;
};

// Mean and sample standard deviation / sqrt(n). n == 1 gives error 0.
// Throws Error on empty input.
MeanSe MeanStandardError(std::span<const double> values);

// Metric names and values in a fixed order: <TYPE>.precision/recall/f1 for
// every class, then overall.precision/recall/f1.
std::vector<std::pair<std::string, double>> FlattenMetrics(
    const RunMetrics &metrics);

// Mean and standard error of every flattened metric across runs. All runs
// must share the same classes. Throws Error on empty input.
std::vector<std::pair<std::string, MeanSe>> Aggregate(
    std::span<const RunMetrics> runs);

// Table with one row per class plus an overall row, values as rounded
// percentages.
std::string FormatReport(const RunMetrics &metrics);

}  // namespace wsner

#endif  // WSNER_EVAL_H_
