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

#include "wsner/corpus.h"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include "wsner/errors.h"
#include "wsner/random.h"

namespace wsner {

namespace {

bool HasPrefix(std::string_view s, std::string_view prefix) {
  return s.substr(0, prefix.size()) == prefix;
}

bool IsBioTag(std::string_view tag) {
  return HasPrefix(tag, "B-") || HasPrefix(tag, "I-");
}

struct RawLine {
  std::string token;
  std::string tag;
  int line;
};

}  // namespace

TagSet::TagSet() : types_{"PER", "ORG", "LOC", "DATE"} {}

TagSet::TagSet(std::vector<std::string> entity_types)
    : types_(std::move(entity_types)) {
  std::set<std::string> seen;
  for (const auto &type : types_) {
    if (type.empty()) throw SchemaError("empty entity type");
    if (type == kOutside) {
      throw SchemaError("outside label \"O\" cannot be an entity type");
    }
    if (!seen.insert(type).second) {
      throw SchemaError("duplicate entity type \"" + type + "\"");
    }
  }
}

int TagSet::TypeIndex(std::string_view type) const {
  for (size_t i = 0; i < types_.size(); ++i) {
    if (types_[i] == type) return static_cast<int>(i);
  }
  return -1;
}

int TagSet::LabelIndex(std::string_view label) const {
  if (label == kOutside) return 0;
  int type = TypeIndex(label);
  return type < 0 ? -1 : type + 1;
}

std::string_view TagSet::LabelName(int index) const {
  if (index == 0) return kOutside;
  return types_.at(index - 1);
}

std::int64_t Dataset::TokenCount() const {
  std::int64_t count = 0;
  for (const auto &s : sentences) count += s.size();
  return count;
}

void ValidateSentence(const LabeledSentence &sentence, const TagSet &tags) {
  for (const auto &token : sentence.tokens) {
    if (token.empty()) throw SchemaError("empty token");
    if (token.find_first_of(" \t\n\r") != std::string::npos) {
      throw SchemaError("token contains whitespace: \"" + token + "\"");
    }
  }
  int previous_end = 0;
  for (const auto &span : sentence.spans) {
    if (!tags.HasType(span.type)) {
      throw SchemaError("unknown entity type \"" + span.type + "\"");
    }
    if (span.start < 0 || span.start >= span.end ||
        span.end > sentence.size()) {
      throw SchemaError("span [" + std::to_string(span.start) + "," +
                        std::to_string(span.end) + ") out of range");
    }
    if (span.start < previous_end) {
      throw SchemaError("spans overlap or are unsorted");
    }
    previous_end = span.end;
  }
}

std::vector<std::string> SpansToBio(const LabeledSentence &sentence) {
  std::vector<std::string> tags(sentence.tokens.size(),
                                std::string(TagSet::kOutside));
  for (const auto &span : sentence.spans) {
    tags[span.start] = "B-" + span.type;
    for (int i = span.start + 1; i < span.end; ++i) tags[i] = "I-" + span.type;
  }
  return tags;
}

std::vector<EntitySpan> BioToSpans(std::span<const std::string> tags,
                                   const TagSet &tag_set) {
  std::vector<EntitySpan> spans;
  bool open = false;
  for (int i = 0; i < static_cast<int>(tags.size()); ++i) {
    std::string_view tag = tags[i];
    if (tag == TagSet::kOutside) {
      open = false;
      continue;
    }
    if (!IsBioTag(tag) || !tag_set.HasType(tag.substr(2))) {
      throw SchemaError("unknown tag \"" + std::string(tag) + "\"");
    }
    std::string_view type = tag.substr(2);
    bool continues = tag[0] == 'I' && open && spans.back().type == type;
    if (continues) {
      spans.back().end = i + 1;
    } else {
      spans.push_back({std::string(type), i, i + 1});
      open = true;
    }
  }
  return spans;
}

std::vector<EntitySpan> IoToSpans(std::span<const std::string> tags,
                                  const TagSet &tag_set) {
  std::vector<EntitySpan> spans;
  bool open = false;
  for (int i = 0; i < static_cast<int>(tags.size()); ++i) {
    std::string_view tag = tags[i];
    if (tag == TagSet::kOutside) {
      open = false;
      continue;
    }
    if (!tag_set.HasType(tag)) {
      throw SchemaError("unknown tag \"" + std::string(tag) + "\"");
    }
    if (open && spans.back().type == tag) {
      spans.back().end = i + 1;
    } else {
      spans.push_back({std::string(tag), i, i + 1});
      open = true;
    }
  }
  return spans;
}

std::vector<int> SpansToLabels(const LabeledSentence &sentence,
                               const TagSet &tag_set) {
  std::vector<int> labels(sentence.tokens.size(), 0);
  for (const auto &span : sentence.spans) {
    int label = tag_set.LabelIndex(span.type);
    if (label <= 0) throw SchemaError("unknown entity type \"" + span.type + "\"");
    for (int i = span.start; i < span.end; ++i) labels[i] = label;
  }
  return labels;
}

std::vector<EntitySpan> LabelsToSpans(std::span<const int> labels,
                                      const TagSet &tag_set) {
  std::vector<EntitySpan> spans;
  for (int i = 0; i < static_cast<int>(labels.size()); ++i) {
    int label = labels[i];
    if (label == 0) continue;
    if (i > 0 && labels[i - 1] == label) {
      spans.back().end = i + 1;
    } else {
      spans.push_back({std::string(tag_set.LabelName(label)), i, i + 1});
    }
  }
  return spans;
}

Dataset ParseConll(std::istream &in, TagScheme scheme, const TagSet &tags,
                   const std::string &name) {
  std::vector<std::vector<RawLine>> blocks(1);
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      if (!blocks.back().empty()) blocks.emplace_back();
      continue;
    }
    size_t tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
      throw ParseError(name, line_number,
                       "expected exactly two tab-separated columns");
    }
    RawLine raw{line.substr(0, tab), line.substr(tab + 1), line_number};
    if (raw.token.empty() || raw.tag.empty()) {
      throw ParseError(name, line_number, "empty token or tag");
    }
    if (raw.token.find(' ') != std::string::npos) {
      throw ParseError(name, line_number, "token contains a space");
    }
    blocks.back().push_back(std::move(raw));
  }
  if (blocks.back().empty()) blocks.pop_back();

  if (scheme == TagScheme::kAuto) {
    scheme = TagScheme::kIo;
    for (const auto &block : blocks) {
      for (const auto &raw : block) {
        if (IsBioTag(raw.tag)) scheme = TagScheme::kBio;
      }
    }
  }

  Dataset dataset;
  dataset.tag_set = tags;
  for (const auto &block : blocks) {
    LabeledSentence sentence;
    std::vector<std::string> tag_column;
    for (const auto &raw : block) {
      bool known = raw.tag == TagSet::kOutside ||
                   (scheme == TagScheme::kBio
                        ? IsBioTag(raw.tag) && tags.HasType(raw.tag.substr(2))
                        : tags.HasType(raw.tag));
      if (!known) {
        throw SchemaError((name.empty() ? "<input>" : name) + ":" +
                          std::to_string(raw.line) + ": unknown tag \"" +
                          raw.tag + "\"");
      }
      sentence.tokens.push_back(raw.token);
      tag_column.push_back(raw.tag);
    }
    sentence.spans = scheme == TagScheme::kBio ? BioToSpans(tag_column, tags)
                                               : IoToSpans(tag_column, tags);
    dataset.sentences.push_back(std::move(sentence));
  }
  return dataset;
}

Dataset ReadConll(const std::string &path, TagScheme scheme,
                  const TagSet &tags) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return ParseConll(in, scheme, tags, path);
}

void WriteConll(const Dataset &dataset, std::ostream &out) {
  bool first = true;
  for (const auto &sentence : dataset.sentences) {
    if (!first) out << '\n';
    first = false;
    auto tags = SpansToBio(sentence);
    for (size_t i = 0; i < tags.size(); ++i) {
      out << sentence.tokens[i] << '\t' << tags[i] << '\n';
    }
  }
}

void WriteConll(const Dataset &dataset, const std::string &path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  WriteConll(dataset, out);
  if (!out) throw Error("write failed: " + path);
}

Dataset SubsampleTokens(const Dataset &dataset, std::int64_t budget,
                        std::uint64_t seed) {
  Dataset result;
  result.tag_set = dataset.tag_set;
  if (budget <= 0) return result;

  std::vector<size_t> order(dataset.sentences.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  rng.Shuffle(order);

  std::vector<size_t> chosen;
  std::int64_t tokens = 0;
  for (size_t index : order) {
    if (tokens >= budget) break;
    chosen.push_back(index);
    tokens += dataset.sentences[index].size();
  }
  std::sort(chosen.begin(), chosen.end());
  for (size_t index : chosen) result.sentences.push_back(dataset.sentences[index]);
  return result;
}

Dataset WithProvenance(Dataset dataset, Provenance provenance) {
  for (auto &sentence : dataset.sentences) sentence.provenance = provenance;
  return dataset;
}

}  // namespace wsner
