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

#include "wsner/gazetteer.h"

#include <algorithm>
#include <fstream>
#include <istream>
#include <tuple>

#include "wsner/errors.h"
#include "wsner/text.h"

namespace wsner {

std::vector<GazetteerEntry> ParseEntityTsv(std::istream &in,
                                           const std::string &name) {
  std::vector<GazetteerEntry> entries;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = Split(line, '\t');
    if (fields.size() != 3) {
      throw ParseError(name, line_number, "expected surface<TAB>type<TAB>source");
    }
    GazetteerEntry entry;
    entry.surface = SplitSpaces(fields[0]);
    if (entry.surface.empty() || Join(entry.surface, " ") != fields[0]) {
      throw ParseError(name, line_number,
                       "surface must be tokens separated by single spaces");
    }
    if (fields[1].empty()) throw ParseError(name, line_number, "empty type");
    entry.type = fields[1];
    entry.source = fields[2];
    entries.push_back(std::move(entry));
  }
  return entries;
}

std::vector<GazetteerEntry> ReadEntityTsv(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return ParseEntityTsv(in, path);
}

Gazetteer::Gazetteer(TagSet tag_set) : tag_set_(std::move(tag_set)) {
  nodes_.emplace_back();
}

int Gazetteer::PriorityRank(std::string_view type) const {
  const auto &priority = options_.priority;
  auto it = std::find(priority.begin(), priority.end(), type);
  if (it != priority.end()) return static_cast<int>(it - priority.begin());
  int index = tag_set_.TypeIndex(type);
  return static_cast<int>(priority.size()) + (index < 0 ? 1000 : index);
}

std::string Gazetteer::NormalizeToken(std::string_view token) const {
  std::string out(token);
  if (options_.normalization.strip_diacritics) {
    out = StripDiacritics(out);
  } else {
    out = NormalizeNfc(out);
  }
  if (options_.normalization.lowercase) out = Lowercase(out);
  return out;
}

int Gazetteer::Insert(const std::vector<std::string> &surface, int type) {
  int node = 0;
  for (const auto &token : surface) {
    auto it = nodes_[node].children.find(token);
    if (it == nodes_[node].children.end()) {
      int child = static_cast<int>(nodes_.size());
      nodes_[node].children.emplace(token, child);
      nodes_.emplace_back();
      node = child;
    } else {
      node = it->second;
    }
  }
  auto &types = nodes_[node].types;
  if (std::find(types.begin(), types.end(), type) != types.end()) return 0;
  types.push_back(type);
  std::sort(types.begin(), types.end(), [this](int a, int b) {
    return std::make_tuple(PriorityRank(tag_set_.entity_types()[a]), a) <
           std::make_tuple(PriorityRank(tag_set_.entity_types()[b]), b);
  });
  max_length_ = std::max<int>(max_length_, surface.size());
  return 1;
}

Gazetteer Gazetteer::Build(std::span<const GazetteerEntry> entries,
                           const GazetteerOptions &options,
                           const TagSet &tag_set) {
  Gazetteer gaz(tag_set);
  gaz.options_ = options;
  if (options.default_min_length < 1) {
    throw SchemaError("minimum length must be at least 1");
  }
  for (const auto &[source, length] : options.min_length) {
    if (length < 1) {
      throw SchemaError("minimum length for source \"" + source +
                        "\" must be at least 1");
    }
  }
  for (const auto &entry : entries) {
    int type = tag_set.TypeIndex(entry.type);
    if (type < 0) throw SchemaError("unknown entity type \"" + entry.type + "\"");
    if (entry.surface.empty()) throw SchemaError("empty gazetteer surface");

    auto it = options.min_length.find(entry.source);
    int min_length =
        it == options.min_length.end() ? options.default_min_length : it->second;
    int characters = 0;
    for (const auto &token : entry.surface) {
      if (token.empty()) throw SchemaError("empty token in gazetteer surface");
      characters += CharacterCount(token);
    }
    if (characters < min_length) continue;

    std::vector<std::string> normalized;
    for (const auto &token : entry.surface) {
      normalized.push_back(gaz.NormalizeToken(token));
    }
    if (options.stop_list.count(Join(normalized, " ")) > 0) continue;
    gaz.pair_count_ += gaz.Insert(normalized, type);
  }
  return gaz;
}

std::optional<std::string> Gazetteer::Lookup(
    std::span<const std::string> tokens) const {
  int node = 0;
  for (const auto &token : tokens) {
    const auto &children = nodes_[node].children;
    auto it = children.find(NormalizeToken(token));
    if (it == children.end()) return std::nullopt;
    node = it->second;
  }
  if (nodes_[node].types.empty()) return std::nullopt;
  return tag_set_.entity_types()[nodes_[node].types.front()];
}

std::vector<EntitySpan> Gazetteer::Match(
    std::span<const std::string> tokens) const {
  std::vector<std::string> normalized;
  normalized.reserve(tokens.size());
  for (const auto &token : tokens) normalized.push_back(NormalizeToken(token));

  std::vector<EntitySpan> spans;
  const int n = static_cast<int>(normalized.size());
  int i = 0;
  while (i < n) {
    int node = 0;
    int best_end = -1;
    int best_type = -1;
    for (int j = i; j < n; ++j) {
      const auto &children = nodes_[node].children;
      auto it = children.find(normalized[j]);
      if (it == children.end()) break;
      node = it->second;
      if (!nodes_[node].types.empty()) {
        best_end = j + 1;
        best_type = nodes_[node].types.front();
      }
    }
    if (best_end < 0) {
      ++i;
      continue;
    }
    spans.push_back({tag_set_.entity_types()[best_type], i, best_end});
    i = best_end;
  }
  return spans;
}

LabeledSentence AnnotateSentence(const std::vector<std::string> &tokens,
                                 const Gazetteer &gazetteer,
                                 const DateRuleSet *date_rules) {
  struct Candidate {
    EntitySpan span;
    int rank;
  };
  std::vector<Candidate> candidates;
  for (auto &span : gazetteer.Match(tokens)) {
    int rank = gazetteer.PriorityRank(span.type);
    candidates.push_back({std::move(span), rank});
  }
  if (date_rules != nullptr && gazetteer.tag_set().HasType("DATE")) {
    for (auto &span : date_rules->Annotate(tokens)) {
      candidates.push_back({std::move(span), 1 << 20});
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate &a, const Candidate &b) {
                     return std::make_tuple(a.span.start, -a.span.length(), a.rank) <
                            std::make_tuple(b.span.start, -b.span.length(), b.rank);
                   });

  LabeledSentence sentence;
  sentence.tokens = tokens;
  sentence.provenance = Provenance::kDistant;
  int covered = 0;
  for (auto &candidate : candidates) {
    if (candidate.span.start < covered) continue;
    covered = candidate.span.end;
    sentence.spans.push_back(std::move(candidate.span));
  }
  return sentence;
}

Dataset AnnotateDistant(const Dataset &dataset, const Gazetteer &gazetteer,
                        const DateRuleSet *date_rules) {
  if (!(dataset.tag_set == gazetteer.tag_set())) {
    throw SchemaError("gazetteer and dataset use different tag sets");
  }
  Dataset out;
  out.tag_set = dataset.tag_set;
  out.sentences.reserve(dataset.sentences.size());
  for (const auto &sentence : dataset.sentences) {
    out.sentences.push_back(AnnotateSentence(sentence.tokens, gazetteer, date_rules));
  }
  return out;
}

}  // namespace wsner
