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

#ifndef WSNER_TEXT_H_
#define WSNER_TEXT_H_

#include <string>
#include <string_view>
#include <vector>

namespace wsner {

// UTF-8 helpers. Invalid byte sequences are replaced by U+FFFD.

// NFC composition.
std::string NormalizeNfc(std::string_view text);

// Full Unicode lowercase mapping (root locale).
std::string Lowercase(std::string_view text);

// Removes combining marks after canonical decomposition, so "ọ̀" and "o"
// compare equal. Result is NFC.
std::string StripDiacritics(std::string_view text);

// Number of code points after NFC composition.
int CharacterCount(std::string_view text);

// Splits on runs of ASCII spaces; no empty pieces.
std::vector<std::string> SplitSpaces(std::string_view text);

// Splits on a single character, keeping empty pieces.
std::vector<std::string> Split(std::string_view text, char separator);

std::string Join(const std::vector<std::string> &pieces, std::string_view glue);

}  // namespace wsner

#endif  // WSNER_TEXT_H_
