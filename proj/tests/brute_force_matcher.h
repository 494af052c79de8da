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

// Reference matcher for gazetteer tests: enumerates every (start, end)
// window and applies greedy leftmost-longest selection. Quadratic and
// trie-free on purpose.

#ifndef WSNER_TESTS_BRUTE_FORCE_MATCHER_H_
#define WSNER_TESTS_BRUTE_FORCE_MATCHER_H_

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "wsner/gazetteer.h"
#include "wsner/random.h"
#include "wsner/text.h"

namespace wsner {
namespace testing {

class WindowOracle {
 public:
  WindowOracle(const std::vector<GazetteerEntry> &entries,
               const GazetteerOptions &options, const TagSet &tags)
      : options_(options), tags_(tags) {
    for (const auto &entry : entries) {
      auto it = options.min_length.find(entry.source);
      int min_length =
          it == options.min_length.end() ? options.default_min_length : it->second;
      int characters = 0;
      for (const auto &token : entry.surface) characters += CharacterCount(token);
      if (characters < min_length) continue;
      table_[Key(entry.surface)].insert(entry.type);
    }
  }

  std::vector<EntitySpan> Match(const std::vector<std::string> &tokens) const {
    const int n = static_cast<int>(tokens.size());
    // All windows that are entries.
    std::vector<std::vector<const std::set<std::string> *>> hits(
        n, std::vector<const std::set<std::string> *>(n + 1, nullptr));
    for (int start = 0; start < n; ++start) {
      for (int end = start + 1; end <= n; ++end) {
        std::vector<std::string> window(tokens.begin() + start, tokens.begin() + end);
        auto it = table_.find(Key(window));
        if (it != table_.end()) hits[start][end] = &it->second;
      }
    }
    std::vector<EntitySpan> spans;
    int i = 0;
    while (i < n) {
      int best = -1;
      for (int end = n; end > i; --end) {
        if (hits[i][end] != nullptr) {
          best = end;
          break;
        }
      }
      if (best < 0) {
        ++i;
        continue;
      }
      spans.push_back({BestType(*hits[i][best]), i, best});
      i = best;
    }
    return spans;
  }

 private:
  std::string Key(const std::vector<std::string> &tokens) const {
    std::string key;
    for (const auto &token : tokens) {
      std::string t = options_.normalization.strip_diacritics ? StripDiacritics(token)
                                                              : NormalizeNfc(token);
      if (options_.normalization.lowercase) t = Lowercase(t);
      key += t;
      key += '\x1f';
    }
    return key;
  }

  int Rank(const std::string &type) const {
    const auto &p = options_.priority;
    auto it = std::find(p.begin(), p.end(), type);
    if (it != p.end()) return static_cast<int>(it - p.begin());
    return static_cast<int>(p.size()) + tags_.TypeIndex(type);
  }

  std::string BestType(const std::set<std::string> &types) const {
    std::string best;
    for (const auto &type : types) {
      if (best.empty() || Rank(type) < Rank(best)) best = type;
    }
    return best;
  }

  GazetteerOptions options_;
  TagSet tags_;
  std::map<std::string, std::set<std::string>> table_;
};

inline std::string RandomWord(Rng &rng, int vocab) {
  std::string word = "w" + std::to_string(rng.UniformInt(vocab));
  if (rng.Uniform() < 0.2) word[0] = 'W';
  return word;
}

inline std::vector<std::string> RandomTokens(Rng &rng, int vocab, int length) {
  std::vector<std::string> tokens;
  for (int i = 0; i < length; ++i) tokens.push_back(RandomWord(rng, vocab));
  return tokens;
}

inline std::vector<GazetteerEntry> RandomEntries(Rng &rng, int vocab, int count,
                                                 int max_length) {
  static const std::vector<std::string> kTypes = {"PER", "ORG", "LOC", "DATE"};
  std::vector<GazetteerEntry> entries;
  for (int e = 0; e < count; ++e) {
    GazetteerEntry entry;
    entry.surface = RandomTokens(rng, vocab, 1 + static_cast<int>(rng.UniformInt(max_length)));
    entry.type = kTypes[rng.UniformInt(kTypes.size())];
    entry.source = rng.Uniform() < 0.5 ? "wikidata" : "names";
    entries.push_back(std::move(entry));
  }
  return entries;
}

}  // namespace testing
}  // namespace wsner

#endif  // WSNER_TESTS_BRUTE_FORCE_MATCHER_H_
