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

#include "wsner/date_rules.h"

#include <fstream>

#include "wsner/errors.h"
#include "wsner/text.h"

namespace wsner {

std::string CanonicalDateForm(std::string_view token) {
  return Lowercase(StripDiacritics(token));
}

DateRuleSet::DateRuleSet(const std::vector<std::string> &keywords,
                         bool digit_rule,
                         std::optional<std::string> digit_pattern)
    : digit_rule_(digit_rule) {
  for (const auto &keyword : keywords) {
    if (!keyword.empty()) keywords_.insert(CanonicalDateForm(keyword));
  }
  if (keywords_.empty()) throw SchemaError("date rule set has no keywords");
  if (digit_pattern) digit_pattern_.emplace(*digit_pattern);
}

const std::vector<std::string> &DateRuleSet::DefaultKeywords() {
  static const std::vector<std::string> keywords = {
      "ọjọ́", "ọsẹ̀", "osù", "ọdún", "wákàtí", "lọdún",
      "lọdún-un", "ọdún-un", "lọsẹ̀", "lọjọ́", "aago"};
  return keywords;
}

DateRuleSet DateRuleSet::Default() { return DateRuleSet(DefaultKeywords()); }

DateRuleSet DateRuleSet::FromFile(const std::string &path, bool digit_rule) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::vector<std::string> keywords;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto pieces = SplitSpaces(line);
    if (pieces.empty() || pieces[0][0] == '#') continue;
    if (pieces.size() != 1) {
      throw ParseError(path, line_number, "expected one keyword per line");
    }
    keywords.push_back(pieces[0]);
  }
  if (keywords.empty()) throw ParseError(path, line_number, "no keywords");
  return DateRuleSet(keywords, digit_rule);
}

bool DateRuleSet::IsKeyword(std::string_view token) const {
  return keywords_.count(CanonicalDateForm(token)) > 0;
}

bool DateRuleSet::IsDigitToken(std::string_view token) const {
  if (digit_pattern_) {
    return std::regex_match(token.begin(), token.end(), *digit_pattern_);
  }
  if (token.empty()) return false;
  for (char c : token) {
    if (c < '0' || c > '9') return false;
  }
  return true;
}

std::vector<bool> DateRuleSet::Mark(std::span<const std::string> tokens) const {
  std::vector<bool> keyword(tokens.size());
  for (size_t i = 0; i < tokens.size(); ++i) keyword[i] = IsKeyword(tokens[i]);
  std::vector<bool> marked(tokens.size());
  for (size_t i = 0; i < tokens.size(); ++i) {
    marked[i] = keyword[i] || (i > 0 && keyword[i - 1]) ||
                (digit_rule_ && IsDigitToken(tokens[i]));
  }
  return marked;
}

std::vector<EntitySpan> DateRuleSet::Annotate(
    std::span<const std::string> tokens) const {
  std::vector<bool> marked = Mark(tokens);
  std::vector<EntitySpan> spans;
  for (int i = 0; i < static_cast<int>(marked.size()); ++i) {
    if (!marked[i]) continue;
    if (i > 0 && marked[i - 1]) {
      spans.back().end = i + 1;
    } else {
      spans.push_back({"DATE", i, i + 1});
    }
  }
  return spans;
}

}  // namespace wsner
