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

#ifndef WSNER_GAZETTEER_H_
#define WSNER_GAZETTEER_H_

#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wsner/corpus.h"
#include "wsner/date_rules.h"

namespace wsner {

struct GazetteerEntry {
  std::vector<std::string> surface;  // tokens
  std::string type;
  std::string source;

  auto operator<=>(const GazetteerEntry &other) const = default;
};

struct NormalizationFlags {
  bool lowercase = false;
  bool strip_diacritics = false;
};

struct GazetteerOptions {
  // Minimum total character count of the surface (spaces excluded), per
  // source. Sources not listed use default_min_length.
  std::map<std::string, int> min_length;
  int default_min_length = 1;
  NormalizationFlags normalization;
  // Resolves equal-length matches with several types at the same position.
  // Types not listed rank after listed ones, in tag set order.
  std::vector<std::string> priority = {"PER", "LOC", "ORG"};
  // Normalized surfaces (tokens joined by single spaces) never stored.
  std::set<std::string> stop_list;
};

// Entity-list file: surface<TAB>type<TAB>source per line, multi-token
// surfaces separated by single spaces. Blank lines are skipped.
std::vector<GazetteerEntry> ReadEntityTsv(const std::string &path);
std::vector<GazetteerEntry> ParseEntityTsv(std::istream &in,
                                           const std::string &name = "");

// Token trie over entity surfaces with greedy longest-match lookup.
class Gazetteer {
 public:
  Gazetteer() : Gazetteer(TagSet()) {}
  explicit Gazetteer(TagSet tag_set);

  // Drops entries below their source's minimum length, normalizes surfaces,
  // deduplicates (surface, type). Throws SchemaError on unknown types and
  // on minimum lengths below 1.
  static Gazetteer Build(std::span<const GazetteerEntry> entries,
                         const GazetteerOptions &options = {},
                         const TagSet &tag_set = TagSet());

  // Left-to-right greedy longest match; scanning resumes after each match.
  std::vector<EntitySpan> Match(std::span<const std::string> tokens) const;

  // Type stored for exactly this token sequence, after priority resolution.
  std::optional<std::string> Lookup(std::span<const std::string> tokens) const;

  // Distinct stored (surface, type) pairs.
  int size() const { return pair_count_; }
  // Longest stored surface, in tokens.
  int max_length() const { return max_length_; }

  // Lower value wins.
  int PriorityRank(std::string_view type) const;

  std::string NormalizeToken(std::string_view token) const;

  const TagSet &tag_set() const { return tag_set_; }
  const GazetteerOptions &options() const { return options_; }

 private:
  struct Node {
    std::map<std::string, int, std::less<>> children;
    std::vector<int> types;  // type indices, sorted by priority rank
  };

  int Insert(const std::vector<std::string> &surface, int type);
  int BestType(const Node &node) const;

  TagSet tag_set_;
  GazetteerOptions options_;
  std::vector<Node> nodes_;
  int pair_count_ = 0;
  int max_length_ = 0;
};

// Distant annotation of every sentence: gazetteer matches plus date-rule
// spans. Overlaps are resolved in favor of the earlier start, then the longer
// span, then gazetteer priority with DATE last. `date_rules` may be null.
// DATE spans are only produced when the tag set has a DATE type.
LabeledSentence AnnotateSentence(const std::vector<std::string> &tokens,
                                 const Gazetteer &gazetteer,
                                 const DateRuleSet *date_rules);
Dataset AnnotateDistant(const Dataset &dataset, const Gazetteer &gazetteer,
                        const DateRuleSet *date_rules);

}  // namespace wsner

#endif  // WSNER_GAZETTEER_H_
