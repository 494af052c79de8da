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

#ifndef WSNER_CORPUS_H_
#define WSNER_CORPUS_H_

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wsner {

// Ordered list of entity types plus the outside label "O". Label indices used
// by the tagger are 0 for "O" and 1 + i for entity_types()[i].
class TagSet {
 public:
  static constexpr std::string_view kOutside = "O";

  // PER, ORG, LOC, DATE.
  TagSet();

  // Throws SchemaError on duplicates, empty labels or an "O" entity type.
  explicit TagSet(std::vector<std::string> entity_types);

  const std::vector<std::string> &entity_types() const { return types_; }

  // Number of tagger labels, |entity_types| + 1.
  int label_count() const { return static_cast<int>(types_.size()) + 1; }

  // Index of an entity type in entity_types(), or -1.
  int TypeIndex(std::string_view type) const;
  bool HasType(std::string_view type) const { return TypeIndex(type) >= 0; }

  // Tagger label index: 0 for "O", 1 + TypeIndex otherwise, -1 if unknown.
  int LabelIndex(std::string_view label) const;
  std::string_view LabelName(int index) const;

  bool operator==(const TagSet &other) const = default;

 private:
  std::vector<std::string> types_;
};

struct EntitySpan {
  std::string type;
  int start = 0;  // inclusive token index
  int end = 0;    // exclusive token index

  int length() const { return end - start; }
  auto operator<=>(const EntitySpan &other) const = default;
};

enum class Provenance { kGold, kDistant };

struct LabeledSentence {
  std::vector<std::string> tokens;
  std::vector<EntitySpan> spans;  // sorted by start, non-overlapping
  Provenance provenance = Provenance::kGold;

  int size() const { return static_cast<int>(tokens.size()); }
  bool operator==(const LabeledSentence &other) const = default;
};

struct Dataset {
  std::vector<LabeledSentence> sentences;
  TagSet tag_set;

  std::int64_t TokenCount() const;
  bool operator==(const Dataset &other) const = default;
};

enum class TagScheme { kBio, kIo, kAuto };

// Marks the "full dataset" clean-size setting.
inline constexpr std::int64_t kUnlimitedBudget =
    std::numeric_limits<std::int64_t>::max();

// Checks token and span invariants. Throws SchemaError.
void ValidateSentence(const LabeledSentence &sentence, const TagSet &tags);

// Reads a two-column CoNLL file (token<TAB>tag, blank line between
// sentences). Throws ParseError for malformed lines and SchemaError for tags
// outside the tag set.
Dataset ReadConll(const std::string &path, TagScheme scheme,
                  const TagSet &tags = TagSet());
Dataset ParseConll(std::istream &in, TagScheme scheme,
                   const TagSet &tags = TagSet(),
                   const std::string &name = "");

// Writes BIO tags.
void WriteConll(const Dataset &dataset, const std::string &path);
void WriteConll(const Dataset &dataset, std::ostream &out);

std::vector<std::string> SpansToBio(const LabeledSentence &sentence);

// Decodes BIO tags. An I-X that does not continue an X span opens a new one,
// as conlleval does. Throws SchemaError on tags outside the tag set.
std::vector<EntitySpan> BioToSpans(std::span<const std::string> tags,
                                   const TagSet &tag_set = TagSet());

// Decodes IO tags; adjacent tokens of the same type form one span.
std::vector<EntitySpan> IoToSpans(std::span<const std::string> tags,
                                  const TagSet &tag_set = TagSet());

// Per-token tagger labels (IO encoding) and back.
std::vector<int> SpansToLabels(const LabeledSentence &sentence,
                               const TagSet &tag_set);
std::vector<EntitySpan> LabelsToSpans(std::span<const int> labels,
                                      const TagSet &tag_set);

// Picks whole sentences in seeded random order until the running token count
// first reaches `budget`. Selected sentences keep their corpus order.
Dataset SubsampleTokens(const Dataset &dataset, std::int64_t budget,
                        std::uint64_t seed);

// Copy of `dataset` with every sentence's provenance set.
Dataset WithProvenance(Dataset dataset, Provenance provenance);

}  // namespace wsner

#endif  // WSNER_CORPUS_H_
