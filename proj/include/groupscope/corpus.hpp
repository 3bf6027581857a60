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

#ifndef GROUPSCOPE_CORPUS_HPP_
#define GROUPSCOPE_CORPUS_HPP_

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "groupscope/error.hpp"

namespace groupscope::corpus {

enum class PartyFamily { CentreLeft, CentreRight, RadicalRight, Other };

std::string_view to_string(PartyFamily f);
std::optional<PartyFamily> parse_party_family(std::string_view s);

// Calendar date; ordering is chronological.
struct Date {
  int year = 0;
  int month = 0;
  int day = 0;

  static std::optional<Date> parse(std::string_view iso);  // YYYY-MM-DD
  std::string to_string() const;
  auto operator<=>(const Date&) const = default;
};

struct Manifesto {
  std::string doc_id;
  std::string party_id;
  PartyFamily party_family = PartyFamily::Other;
  std::string country;   // ISO 3166-1 alpha-2
  Date election_date;
  std::string language;  // ISO 639-1
  std::optional<double> vote_share_pct;
  std::optional<bool> in_government_prior;
  std::string full_text;

  // Country plus election date, e.g. "DE-2017-09-24".
  std::string election_id() const;
};

struct Sentence {
  std::string sentence_id;
  std::string doc_id;
  size_t index = 0;
  std::string text;
};

std::string make_sentence_id(std::string_view doc_id, size_t index);

struct Rejection {
  size_t line_no = 0;
  std::string reason;
};

struct Corpus {
  std::vector<Manifesto> manifestos;
  std::vector<Rejection> rejections;

  const Manifesto* find(std::string_view doc_id) const;
};

enum class Format { jsonl, csv };

std::optional<Format> parse_format(std::string_view s);

// Thrown for duplicate doc_ids; carries both offending line numbers.
class DuplicateDocIdError : public ValidationError {
 public:
  DuplicateDocIdError(const std::string& doc_id, size_t first_line, size_t second_line);
  std::string doc_id;
  size_t first_line;
  size_t second_line;
};

Corpus ingest(const std::filesystem::path& path, Format format);
Corpus ingest_jsonl(std::string_view content);
Corpus ingest_csv(std::string_view content);

std::string to_jsonl(const std::vector<Manifesto>& manifestos);
std::string rejections_to_jsonl(const std::vector<Rejection>& rejections);

// Sentence splitting.

struct SplitOptions {
  // Extra abbreviations (lowercase, without the trailing period) per language,
  // merged with the built-in lists.
  std::map<std::string, std::set<std::string>> extra_abbreviations;
};

const std::set<std::string>& builtin_abbreviations(std::string_view language);

// Splits on terminal punctuation and line breaks. Output texts are NFC with
// white space collapsed; nothing but white space is ever dropped.
std::vector<std::string> split_text(std::string_view text, std::string_view language,
                                    const SplitOptions& options = {});

std::vector<Sentence> split_sentences(const Manifesto& m,
                                      std::vector<std::string>* warnings = nullptr,
                                      const SplitOptions& options = {});

std::string sentences_to_jsonl(const std::vector<Sentence>& sentences);
std::vector<Sentence> sentences_from_jsonl(std::string_view content);

}  // namespace groupscope::corpus

#endif  // GROUPSCOPE_CORPUS_HPP_
