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

// Scalar re-implementation of the tagger forward pass, written directly from
// the layer equations with plain loops. Used as an oracle for the Eigen code.

#ifndef WSNER_TESTS_REFERENCE_TAGGER_H_
#define WSNER_TESTS_REFERENCE_TAGGER_H_

#include <cmath>
#include <vector>

#include "wsner/tagger.h"

namespace wsner {
namespace testing {

using Matrix = std::vector<std::vector<double>>;  // [token][unit]

inline double Logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Returns per-token label distributions [token][label].
inline Matrix ReferenceForward(const std::vector<std::string> &tokens,
                               const TaggerParams &p, const EmbeddingTable &table) {
  const TaggerShape &s = p.shape();
  const int n = static_cast<int>(tokens.size());
  const int d = s.input_size, h = s.hidden_size, f = s.feature_size, L = s.label_count;
  const bool lstm = s.cell == CellType::kLstm;

  Matrix x(n, std::vector<double>(d));
  for (int t = 0; t < n; ++t) {
    int row = table.Index(tokens[t]);
    for (int k = 0; k < d; ++k) {
      if (s.embedding_rows > 0) {
        x[t][k] = p.Embeddings()(row < 0 ? table.size() : row, k);
      } else {
        x[t][k] = row < 0 ? table.unk_vector()(k) : table.matrix()(row, k);
      }
    }
  }

  Matrix states(n, std::vector<double>(2 * h, 0.0));
  for (int dir = 0; dir < 2; ++dir) {
    std::vector<double> prev_h(h, 0.0), prev_c(h, 0.0);
    for (int step = 0; step < n; ++step) {
      int t = dir == 0 ? step : n - 1 - step;
      int gates = lstm ? 4 : 1;
      std::vector<double> z(gates * h);
      for (int r = 0; r < gates * h; ++r) {
        double sum = p.CellBias(dir)(r);
        for (int k = 0; k < d; ++k) sum += p.CellInput(dir)(r, k) * x[t][k];
        for (int k = 0; k < h; ++k) sum += p.CellRecurrent(dir)(r, k) * prev_h[k];
        z[r] = sum;
      }
      std::vector<double> hidden(h), cell(h);
      for (int u = 0; u < h; ++u) {
        if (lstm) {
          double in = Logistic(z[u]);
          double forget = Logistic(z[h + u]);
          double candidate = std::tanh(z[2 * h + u]);
          double out = Logistic(z[3 * h + u]);
          cell[u] = forget * prev_c[u] + in * candidate;
          hidden[u] = out * std::tanh(cell[u]);
        } else {
          hidden[u] = std::tanh(z[u]);
        }
        states[t][dir * h + u] = hidden[u];
      }
      prev_h = hidden;
      prev_c = cell;
    }
  }

  Matrix probs(n, std::vector<double>(L));
  for (int t = 0; t < n; ++t) {
    std::vector<double> feature(f);
    for (int r = 0; r < f; ++r) {
      double sum = p.FeatureBias()(r);
      for (int k = 0; k < 2 * h; ++k) sum += p.FeatureWeight()(r, k) * states[t][k];
      feature[r] = sum;
    }
    double norm = 0.0;
    for (int l = 0; l < L; ++l) {
      double sum = p.OutputBias()(l);
      for (int k = 0; k < f; ++k) sum += p.OutputWeight()(l, k) * feature[k];
      probs[t][l] = std::exp(sum);
      norm += probs[t][l];
    }
    for (int l = 0; l < L; ++l) probs[t][l] /= norm;
  }
  return probs;
}

}  // namespace testing
}  // namespace wsner

#endif  // WSNER_TESTS_REFERENCE_TAGGER_H_
