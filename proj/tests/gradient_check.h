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

// Central finite-difference gradient check used by unit and acceptance tests.

#ifndef WSNER_TESTS_GRADIENT_CHECK_H_
#define WSNER_TESTS_GRADIENT_CHECK_H_

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "wsner/random.h"
#include "wsner/tagger.h"

namespace wsner {
namespace testing {

// |a - n| / max(|a|, |n|, floor).
inline double RelativeError(double analytic, double numeric, double floor = 1e-6) {
  return std::abs(analytic - numeric) /
         std::max({std::abs(analytic), std::abs(numeric), floor});
}

// Max relative error between `analytic` and central differences of `loss`
// with respect to `values`, which `loss` must read.
inline double MaxGradientError(Eigen::VectorXd &values, const Eigen::VectorXd &analytic,
                               const std::function<double()> &loss,
                               double step = 1e-5) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    const double saved = values(i);
    values(i) = saved + step;
    const double plus = loss();
    values(i) = saved - step;
    const double minus = loss();
    values(i) = saved;
    worst = std::max(worst, RelativeError(analytic(i), (plus - minus) / (2 * step)));
  }
  return worst;
}

struct TinyProblem {
  EmbeddingTable table;
  TaggerParams params;
  std::vector<TrainingItem> batch;
  int label_count = 0;
};

// Random model with at most `max_params` parameters and a batch of one or
// two sentences with hard or soft targets.
inline TinyProblem RandomTinyProblem(Rng &rng, int max_params = 200) {
  while (true) {
    TinyProblem problem;
    const int d = 1 + static_cast<int>(rng.UniformInt(3));
    const int vocab = 2 + static_cast<int>(rng.UniformInt(3));
    RowMatrix vectors(vocab, d);
    std::vector<std::string> words;
    for (int w = 0; w < vocab; ++w) {
      words.push_back("v" + std::to_string(w));
      for (int k = 0; k < d; ++k) vectors(w, k) = rng.Uniform(-1.0, 1.0);
    }
    problem.table = EmbeddingTable(words, vectors);
    TaggerConfig config;
    config.hidden_size = 1 + static_cast<int>(rng.UniformInt(2));
    config.feature_size = 1 + static_cast<int>(rng.UniformInt(3));
    config.cell = rng.Uniform() < 0.5 ? CellType::kLstm : CellType::kRnn;
    config.fine_tune_embeddings = rng.Uniform() < 0.3;
    problem.label_count = 2 + static_cast<int>(rng.UniformInt(2));
    TaggerShape shape = MakeShape(config, problem.table, problem.label_count);
    if (TaggerParams(shape).size() > max_params) continue;
    problem.params = InitParams(shape, problem.table, rng);
    // Larger weights than the default init so gradients are not tiny.
    problem.params.values() *= 2.0;

    const int sentences = 1 + static_cast<int>(rng.UniformInt(2));
    for (int s = 0; s < sentences; ++s) {
      TrainingItem item;
      const int n = 1 + static_cast<int>(rng.UniformInt(4));
      for (int t = 0; t < n; ++t) {
        // Occasionally an unknown word.
        item.tokens.push_back(rng.Uniform() < 0.15 ? "unseen"
                                                   : words[rng.UniformInt(vocab)]);
      }
      if (rng.Uniform() < 0.5) {
        item.kind = TrainingItem::Kind::kHard;
        for (int t = 0; t < n; ++t) {
          item.labels.push_back(static_cast<int>(rng.UniformInt(problem.label_count)));
        }
      } else {
        item.kind = TrainingItem::Kind::kSoft;
        item.soft.resize(problem.label_count, n);
        for (int t = 0; t < n; ++t) {
          for (int l = 0; l < problem.label_count; ++l) item.soft(l, t) = rng.Uniform() + 0.05;
          item.soft.col(t) /= item.soft.col(t).sum();
        }
      }
      problem.batch.push_back(std::move(item));
    }
    return problem;
  }
}

// Gradient check of LossAndGradient on a tiny problem.
inline double TaggerGradientError(TinyProblem &problem) {
  LossGradient lg = LossAndGradient(problem.batch, problem.params, problem.table);
  Eigen::VectorXd analytic = lg.gradient.values();
  return MaxGradientError(problem.params.values(), analytic, [&] {
    return LossAndGradient(problem.batch, problem.params, problem.table).loss;
  });
}

}  // namespace testing
}  // namespace wsner

#endif  // WSNER_TESTS_GRADIENT_CHECK_H_
