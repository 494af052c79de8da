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

#include "wsner/text.h"

#include <unicode/normalizer2.h>
#include <unicode/locid.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include "wsner/errors.h"

namespace wsner {

namespace {

const icu::Normalizer2 &Nfc() {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2 *n = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw Error("ICU NFC normalizer unavailable");
  return *n;
}

const icu::Normalizer2 &Nfd() {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2 *n = icu::Normalizer2::getNFDInstance(status);
  if (U_FAILURE(status)) throw Error("ICU NFD normalizer unavailable");
  return *n;
}

icu::UnicodeString Decode(std::string_view text) {
  return icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
}

std::string Encode(const icu::UnicodeString &text) {
  std::string out;
  text.toUTF8String(out);
  return out;
}

icu::UnicodeString Normalize(const icu::Normalizer2 &form,
                             const icu::UnicodeString &text) {
  UErrorCode status = U_ZERO_ERROR;
  icu::UnicodeString out = form.normalize(text, status);
  if (U_FAILURE(status)) throw Error("unicode normalization failed");
  return out;
}

}  // namespace

std::string NormalizeNfc(std::string_view text) {
  return Encode(Normalize(Nfc(), Decode(text)));
}

std::string Lowercase(std::string_view text) {
  icu::UnicodeString s = Decode(text);
  s.toLower(icu::Locale::getRoot());
  return Encode(s);
}

std::string StripDiacritics(std::string_view text) {
  icu::UnicodeString decomposed = Normalize(Nfd(), Decode(text));
  icu::UnicodeString kept;
  for (int32_t i = 0; i < decomposed.length();) {
    UChar32 c = decomposed.char32At(i);
    if (u_charType(c) != U_NON_SPACING_MARK) kept.append(c);
    i += U16_LENGTH(c);
  }
  return Encode(Normalize(Nfc(), kept));
}

int CharacterCount(std::string_view text) {
  icu::UnicodeString s = Normalize(Nfc(), Decode(text));
  return s.countChar32();
}

std::vector<std::string> SplitSpaces(std::string_view text) {
  std::vector<std::string> pieces;
  size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && text[i] == ' ') ++i;
    size_t j = i;
    while (j < text.size() && text[j] != ' ') ++j;
    if (j > i) pieces.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return pieces;
}

std::vector<std::string> Split(std::string_view text, char separator) {
  std::vector<std::string> pieces;
  size_t start = 0;
  while (true) {
    size_t pos = text.find(separator, start);
    if (pos == std::string_view::npos) {
      pieces.emplace_back(text.substr(start));
      return pieces;
    }
    pieces.emplace_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string Join(const std::vector<std::string> &pieces, std::string_view glue) {
  std::string out;
  for (size_t i = 0; i < pieces.size(); ++i) {
    if (i > 0) out += glue;
    out += pieces[i];
  }
  return out;
}

}  // namespace wsner
