// Copyright 2026 The GroupScope Authors.
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

#ifndef GROUPSCOPE_TEXT_HPP_
#define GROUPSCOPE_TEXT_HPP_

#include <string>
#include <string_view>
#include <vector>

namespace groupscope::text {

// Decodes UTF-8 into code points. Invalid sequences decode to U+FFFD.
std::u32string decode_utf8(std::string_view s);
std::string encode_utf8(std::u32string_view s);

// Unicode NFC of a UTF-8 string.
std::string nfc(std::string_view s);

// Canonical form for phrase comparison: NFC, simple per-code-point
// lowercase, runs of white space collapsed to one space, trimmed.
std::string normalize(std::string_view s);

// Collapses white space runs to a single space and trims, after NFC.
// Case is kept.
std::string collapse_whitespace(std::string_view s);

// Per-code-point simple lowercase mapping (length preserving).
char32_t to_lower(char32_t c);
bool is_letter(char32_t c);
bool is_upper(char32_t c);
bool is_digit(char32_t c);
bool is_space(char32_t c);

std::string trim(std::string_view s);

}  // namespace groupscope::text

#endif  // GROUPSCOPE_TEXT_HPP_
