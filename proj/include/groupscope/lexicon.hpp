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

#ifndef GROUPSCOPE_LEXICON_HPP_
#define GROUPSCOPE_LEXICON_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "groupscope/corpus.hpp"
#include "groupscope/error.hpp"

namespace groupscope::lexicon {

enum class Category {
  age, gender, education, religion, income, employment, place, migration,
  family, occupation, student, entrepreneur, other
};

std::string_view to_string(Category c);
std::optional<Category> parse_category(std::string_view s);

struct GroupEntry {
  std::string group_id;
  std::string canonical_label;
  Category category = Category::other;
  // language -> normalized synonyms
  std::map<std::string, std::set<std::string>> synonyms;

  bool operator==(const GroupEntry&) const = default;
};

enum class Decision { accept_as_synonym, accept_as_new_group, reject };

std::string_view to_string(Decision d);
std::optional<Decision> parse_decision(std::string_view s);

struct ExpansionEvent {
  uint64_t event_id = 0;
  std::string timestamp;
  std::string surface_phrase;
  std::string language;
  Decision decision = Decision::reject;
  std::string target_group_id;  // synonym decisions; optional id for new groups
  std::string reviewer;
};

class CollisionError : public ValidationError {
 public:
  CollisionError(const std::string& phrase, const std::string& language,
                 const std::string& existing_group, const std::string& requested_group);
  std::string phrase;
  std::string language;
  std::string existing_group;
  std::string requested_group;
};

class ReplayError : public ValidationError {
 public:
  ReplayError(uint64_t event_id, const std::string& why);
  uint64_t event_id;
};

// Immutable-by-convention snapshot; apply_expansion returns a new value.
struct GroupLexicon {
  std::map<std::string, GroupEntry> entries;
  int64_t version = 0;
  std::vector<ExpansionEvent> journal;

  // group_id owning `normalized` in `language`, if any.
  std::optional<std::string> owner(std::string_view language, std::string_view normalized) const;
  std::set<std::string> languages() const;
  bool operator==(const GroupLexicon&) const;
};

// Throws ValidationError when an invariant does not hold.
void validate(const GroupLexicon& lex);

// Identifier for a group created from a surface phrase.
std::string slug_for(std::string_view phrase);

GroupLexicon apply_expansion(const GroupLexicon& lex, const ExpansionEvent& event);
GroupLexicon replay(const GroupLexicon& seed, const std::vector<ExpansionEvent>& journal);

// File formats.
GroupLexicon parse_lexicon(std::string_view json_text);
GroupLexicon load_lexicon(const std::filesystem::path& path);
std::string serialize_lexicon(const GroupLexicon& lex);
std::vector<ExpansionEvent> parse_journal(std::string_view jsonl);
std::vector<ExpansionEvent> load_journal(const std::filesystem::path& path);  // missing file = empty
std::string serialize_event(const ExpansionEvent& event);
std::string serialize_journal(const std::vector<ExpansionEvent>& journal);

// Matching.

enum class Method { dictionary, llm_esf };
std::string_view to_string(Method m);
std::optional<Method> parse_method(std::string_view s);

struct GroupMention {
  std::string sentence_id;
  std::string group_id;
  std::string matched_surface;
  // Code point offsets [start, end) into the NFC form of the sentence text.
  size_t start = 0;
  size_t end = 0;
  Method method = Method::dictionary;

  auto operator<=>(const GroupMention&) const = default;
};

// Phrase matcher for one language of one lexicon snapshot.
class Matcher {
 public:
  Matcher(const GroupLexicon& lex, std::string_view language, Method method = Method::dictionary);

  bool supported() const { return supported_; }
  std::vector<GroupMention> match(const corpus::Sentence& sentence) const;

 private:
  struct Node {
    std::map<char32_t, size_t> next;
    std::vector<std::string> groups;  // groups owning the phrase ending here
  };
  std::vector<Node> trie_;
  bool supported_ = false;
  Method method_;
};

// Counters for match calls on languages without synonyms.
struct MatchStats {
  size_t unsupported_language = 0;
};

std::vector<GroupMention> match(const corpus::Sentence& sentence, const GroupLexicon& lex,
                                std::string_view language, MatchStats* stats = nullptr);

std::string mentions_to_jsonl(const std::vector<GroupMention>& mentions);
std::vector<GroupMention> mentions_from_jsonl(std::string_view content);

}  // namespace groupscope::lexicon

#endif  // GROUPSCOPE_LEXICON_HPP_
