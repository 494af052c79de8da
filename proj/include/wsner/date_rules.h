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

#ifndef WSNER_DATE_RULES_H_
#define WSNER_DATE_RULES_H_

#include <optional>
#include <regex>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wsner/corpus.h"

namespace wsner {

// Lowercased, diacritic-free comparison form used for date keywords.
std::string CanonicalDateForm(std::string_view token);

// Keyword-driven DATE annotator. A token is marked DATE when it is a keyword,
// when it immediately follows a keyword, or (with the digit rule) when it is
// made of decimal digits only. Maximal runs of marked tokens become spans.
class DateRuleSet {
 public:
  // Throws SchemaError when `keywords` is empty. `digit_pattern`, when set,
  // replaces the all-digits test with a full-match regular expression.
  explicit DateRuleSet(const std::vector<std::string> &keywords,
                       bool digit_rule = true,
                       std::optional<std::string> digit_pattern = std::nullopt);

  // The eleven Yoruba date keywords.
  static DateRuleSet Default();
  static const std::vector<std::string> &DefaultKeywords();

  // One keyword per line, '#' starts a comment line. Throws ParseError when
  // the file holds no keywords.
  static DateRuleSet FromFile(const std::string &path, bool digit_rule = true);

  bool IsKeyword(std::string_view token) const;
  bool IsDigitToken(std::string_view token) const;

  // Per-token DATE marks.
  std::vector<bool> Mark(std::span<const std::string> tokens) const;
  std::vector<EntitySpan> Annotate(std::span<const std::string> tokens) const;

  const std::set<std::string> &keywords() const { return keywords_; }
  bool digit_rule() const { return digit_rule_; }

 private:
  std::set<std::string> keywords_;
  bool digit_rule_;
  std::optional<std::regex> digit_pattern_;
};

}  // namespace wsner

#endif  // WSNER_DATE_RULES_H_
