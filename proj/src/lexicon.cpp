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

#include "groupscope/lexicon.hpp"

#include <algorithm>
#include <tuple>

#include "groupscope/io.hpp"
#include "groupscope/text.hpp"
#include "json.hpp"

namespace groupscope::lexicon {

using nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {
constexpr const char* kCategoryNames[] = {
    "age", "gender", "education", "religion", "income", "employment", "place",
    "migration", "family", "occupation", "student", "entrepreneur", "other"};
}

std::string_view to_string(Category c) { return kCategoryNames[static_cast<int>(c)]; }

std::optional<Category> parse_category(std::string_view s) {
  for (int i = 0; i <= static_cast<int>(Category::other); ++i)
    if (s == kCategoryNames[i]) return static_cast<Category>(i);
  return std::nullopt;
}

std::string_view to_string(Decision d) {
  switch (d) {
    case Decision::accept_as_synonym: return "accept_as_synonym";
    case Decision::accept_as_new_group: return "accept_as_new_group";
    case Decision::reject: return "reject";
  }
  return "reject";
}

std::optional<Decision> parse_decision(std::string_view s) {
  if (s == "accept_as_synonym") return Decision::accept_as_synonym;
  if (s == "accept_as_new_group") return Decision::accept_as_new_group;
  if (s == "reject") return Decision::reject;
  return std::nullopt;
}

std::string_view to_string(Method m) { return m == Method::dictionary ? "dictionary" : "llm_esf"; }

std::optional<Method> parse_method(std::string_view s) {
  if (s == "dictionary") return Method::dictionary;
  if (s == "llm_esf") return Method::llm_esf;
  return std::nullopt;
}

CollisionError::CollisionError(const std::string& p, const std::string& lang,
                               const std::string& existing, const std::string& requested)
    : ValidationError("synonym collision: \"" + p + "\" (" + lang + ") belongs to " + existing +
                      ", cannot assign to " + requested),
      phrase(p),
      language(lang),
      existing_group(existing),
      requested_group(requested) {}

ReplayError::ReplayError(uint64_t id, const std::string& why)
    : ValidationError("replay aborted at event " + std::to_string(id) + ": " + why), event_id(id) {}

std::optional<std::string> GroupLexicon::owner(std::string_view language,
                                               std::string_view normalized) const {
  for (const auto& [id, entry] : entries) {
    auto it = entry.synonyms.find(std::string(language));
    if (it != entry.synonyms.end() && it->second.count(std::string(normalized))) return id;
  }
  return std::nullopt;
}

std::set<std::string> GroupLexicon::languages() const {
  std::set<std::string> out;
  for (const auto& [id, entry] : entries)
    for (const auto& [lang, syns] : entry.synonyms)
      if (!syns.empty()) out.insert(lang);
  return out;
}

bool GroupLexicon::operator==(const GroupLexicon& other) const {
  return serialize_lexicon(*this) == serialize_lexicon(other) &&
         serialize_journal(journal) == serialize_journal(other.journal);
}

void validate(const GroupLexicon& lex) {
  std::map<std::pair<std::string, std::string>, std::string> owners;
  for (const auto& [id, entry] : lex.entries) {
    if (id.empty() || id != entry.group_id) throw ValidationError("bad group_id \"" + id + "\"");
    bool label_found = false;
    std::string label = text::normalize(entry.canonical_label);
    for (const auto& [lang, syns] : entry.synonyms) {
      for (const auto& s : syns) {
        if (s.empty() || s != text::normalize(s))
          throw ValidationError("group " + id + " has a non-normalized synonym \"" + s + "\"");
        auto [it, inserted] = owners.emplace(std::make_pair(lang, s), id);
        if (!inserted) throw CollisionError(s, lang, it->second, id);
        if (s == label) label_found = true;
      }
    }
    if (!label_found)
      throw ValidationError("canonical_label of " + id + " is not among its synonyms");
  }
}

std::string slug_for(std::string_view phrase) {
  std::u32string out;
  bool pending = false;
  for (char32_t c : text::decode_utf8(text::normalize(phrase))) {
    if (text::is_letter(c) || text::is_digit(c)) {
      if (pending && !out.empty()) out.push_back(U'_');
      pending = false;
      out.push_back(c);
    } else {
      pending = true;
    }
  }
  return text::encode_utf8(out);
}

GroupLexicon apply_expansion(const GroupLexicon& lex, const ExpansionEvent& event) {
  if (!lex.journal.empty() && event.event_id <= lex.journal.back().event_id) {
    throw ValidationError("event " + std::to_string(event.event_id) +
                          " is not after the last journal event " +
                          std::to_string(lex.journal.back().event_id));
  }
  if (event.language.empty()) throw ValidationError("event has no language");
  std::string phrase = text::normalize(event.surface_phrase);
  if (phrase.empty()) throw ValidationError("event has an empty surface phrase");

  GroupLexicon next = lex;
  switch (event.decision) {
    case Decision::reject:
      break;
    case Decision::accept_as_synonym: {
      auto target = next.entries.find(event.target_group_id);
      if (target == next.entries.end())
        throw ValidationError("unknown target_group_id \"" + event.target_group_id + "\"");
      if (auto current = lex.owner(event.language, phrase)) {
        if (*current == event.target_group_id)
          throw ValidationError("\"" + phrase + "\" is already a synonym of " + *current);
        throw CollisionError(phrase, event.language, *current, event.target_group_id);
      }
      target->second.synonyms[event.language].insert(phrase);
      ++next.version;
      break;
    }
    case Decision::accept_as_new_group: {
      std::string id = event.target_group_id.empty() ? slug_for(phrase) : event.target_group_id;
      if (id.empty()) throw ValidationError("cannot derive a group_id from \"" + phrase + "\"");
      if (next.entries.count(id)) throw ValidationError("group \"" + id + "\" already exists");
      if (auto current = lex.owner(event.language, phrase))
        throw CollisionError(phrase, event.language, *current, id);
      GroupEntry entry;
      entry.group_id = id;
      entry.canonical_label = text::collapse_whitespace(event.surface_phrase);
      entry.category = Category::other;
      entry.synonyms[event.language].insert(phrase);
      next.entries.emplace(id, std::move(entry));
      ++next.version;
      break;
    }
  }
  next.journal.push_back(event);
  return next;
}

GroupLexicon replay(const GroupLexicon& seed, const std::vector<ExpansionEvent>& journal) {
  GroupLexicon lex = seed;
  for (size_t i = 0; i < journal.size(); ++i) {
    if (i > 0 && journal[i].event_id <= journal[i - 1].event_id)
      throw ReplayError(journal[i].event_id, "out of order");
    try {
      lex = apply_expansion(lex, journal[i]);
    } catch (const ReplayError&) {
      throw;
    } catch (const ValidationError& e) {
      throw ReplayError(journal[i].event_id, e.what());
    }
  }
  return lex;
}

GroupLexicon parse_lexicon(std::string_view json_text) {
  json j = json::parse(json_text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ValidationError("lexicon is not a JSON object");
  GroupLexicon lex;
  try {
    lex.version = j.at("version").get<int64_t>();
    for (const auto& e : j.at("entries")) {
      GroupEntry entry;
      entry.group_id = e.at("group_id").get<std::string>();
      entry.canonical_label = e.at("canonical_label").get<std::string>();
      std::string cat = e.value("category", "other");
      auto c = parse_category(cat);
      if (!c) throw ValidationError("unknown category \"" + cat + "\" in " + entry.group_id);
      entry.category = *c;
      for (const auto& [lang, list] : e.at("synonyms").items()) {
        for (const auto& s : list) {
          std::string n = text::normalize(s.get<std::string>());
          if (n.empty()) throw ValidationError("empty synonym in " + entry.group_id);
          entry.synonyms[lang].insert(n);
        }
      }
      if (lex.entries.count(entry.group_id))
        throw ValidationError("duplicate group_id \"" + entry.group_id + "\"");
      lex.entries.emplace(entry.group_id, std::move(entry));
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed lexicon: ") + e.what());
  }
  validate(lex);
  return lex;
}

GroupLexicon load_lexicon(const std::filesystem::path& path) {
  return parse_lexicon(io::read_file(path));
}

std::string serialize_lexicon(const GroupLexicon& lex) {
  ojson root;
  root["version"] = lex.version;
  root["entries"] = ojson::array();
  for (const auto& [id, entry] : lex.entries) {
    ojson e;
    e["group_id"] = entry.group_id;
    e["canonical_label"] = entry.canonical_label;
    e["category"] = to_string(entry.category);
    ojson syn = ojson::object();
    for (const auto& [lang, set] : entry.synonyms) syn[lang] = std::vector<std::string>(set.begin(), set.end());
    e["synonyms"] = std::move(syn);
    root["entries"].push_back(std::move(e));
  }
  return root.dump(2) + "\n";
}

namespace {

ExpansionEvent event_from_json(const json& j) {
  ExpansionEvent ev;
  ev.event_id = j.at("event_id").get<uint64_t>();
  ev.timestamp = j.value("timestamp", "");
  ev.surface_phrase = j.at("surface_phrase").get<std::string>();
  ev.language = j.at("language").get<std::string>();
  std::string d = j.at("decision").get<std::string>();
  auto dec = parse_decision(d);
  if (!dec) throw ValidationError("unknown decision \"" + d + "\"");
  ev.decision = *dec;
  if (j.contains("target_group_id") && j["target_group_id"].is_string())
    ev.target_group_id = j["target_group_id"].get<std::string>();
  ev.reviewer = j.value("reviewer", "");
  return ev;
}

}  // namespace

std::vector<ExpansionEvent> parse_journal(std::string_view jsonl) {
  std::vector<ExpansionEvent> out;
  auto lines = io::split_lines(jsonl);
  for (size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    json j = json::parse(lines[i], nullptr, false);
    if (j.is_discarded()) throw ValidationError("malformed journal line " + std::to_string(i + 1));
    try {
      out.push_back(event_from_json(j));
    } catch (const json::exception& e) {
      throw ValidationError("bad journal line " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return out;
}

std::vector<ExpansionEvent> load_journal(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) return {};
  return parse_journal(io::read_file(path));
}

std::string serialize_event(const ExpansionEvent& ev) {
  ojson j;
  j["event_id"] = ev.event_id;
  j["timestamp"] = ev.timestamp;
  j["surface_phrase"] = ev.surface_phrase;
  j["language"] = ev.language;
  j["decision"] = to_string(ev.decision);
  j["target_group_id"] = ev.target_group_id.empty() ? ojson(nullptr) : ojson(ev.target_group_id);
  j["reviewer"] = ev.reviewer;
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

std::string serialize_journal(const std::vector<ExpansionEvent>& journal) {
  std::string out;
  for (const auto& ev : journal) out += serialize_event(ev) + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Matching

Matcher::Matcher(const GroupLexicon& lex, std::string_view language, Method method)
    : trie_(1), method_(method) {
  for (const auto& [id, entry] : lex.entries) {
    auto it = entry.synonyms.find(std::string(language));
    if (it == entry.synonyms.end()) continue;
    for (const auto& syn : it->second) {
      size_t node = 0;
      for (char32_t c : text::decode_utf8(syn)) {
        auto next = trie_[node].next.find(c);
        if (next == trie_[node].next.end()) {
          trie_.push_back({});
          next = trie_[node].next.emplace(c, trie_.size() - 1).first;
        }
        node = next->second;
      }
      trie_[node].groups.push_back(id);
      supported_ = true;
    }
  }
}

std::vector<GroupMention> Matcher::match(const corpus::Sentence& sentence) const {
  std::vector<GroupMention> out;
  if (!supported_) return out;
  std::u32string cps = text::decode_utf8(text::nfc(sentence.text));

  // Lowercased, space-collapsed view with a map back to code point offsets.
  std::u32string stream;
  std::vector<size_t> origin;
  bool pending = false;
  size_t pending_at = 0;
  for (size_t i = 0; i < cps.size(); ++i) {
    if (text::is_space(cps[i])) {
      if (!pending && !stream.empty()) pending_at = i;
      pending = !stream.empty();
      continue;
    }
    if (pending) {
      stream.push_back(U' ');
      origin.push_back(pending_at);
      pending = false;
    }
    stream.push_back(text::to_lower(cps[i]));
    origin.push_back(i);
  }

  struct Hit {
    size_t start, end;  // stream offsets
    std::string group;
  };
  std::map<std::string, std::vector<Hit>> by_group;
  for (size_t p = 0; p < stream.size(); ++p) {
    if (p > 0 && text::is_letter(stream[p - 1]) && text::is_letter(stream[p])) continue;
    size_t node = 0;
    for (size_t q = p; q < stream.size(); ++q) {
      auto next = trie_[node].next.find(stream[q]);
      if (next == trie_[node].next.end()) break;
      node = next->second;
      if (trie_[node].groups.empty()) continue;
      bool end_ok = q + 1 == stream.size() || !text::is_letter(stream[q]) ||
                    !text::is_letter(stream[q + 1]);
      if (!end_ok) continue;
      for (const auto& g : trie_[node].groups) by_group[g].push_back({p, q + 1, g});
    }
  }

  // Longest match wins among overlapping hits of the same group.
  for (auto& [group, hits] : by_group) {
    std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
      size_t la = a.end - a.start, lb = b.end - b.start;
      if (la != lb) return la > lb;
      return a.start < b.start;
    });
    std::vector<Hit> kept;
    for (const auto& h : hits) {
      bool overlaps = std::any_of(kept.begin(), kept.end(), [&](const Hit& k) {
        return h.start < k.end && k.start < h.end;
      });
      if (!overlaps) kept.push_back(h);
    }
    for (const auto& h : kept) {
      size_t b = origin[h.start];
      size_t e = origin[h.end - 1] + 1;
      out.push_back(GroupMention{sentence.sentence_id, group,
                                 text::encode_utf8(std::u32string_view(cps).substr(b, e - b)), b, e,
                                 method_});
    }
  }
  std::sort(out.begin(), out.end(), [](const GroupMention& a, const GroupMention& b) {
    return std::tie(a.start, a.end, a.group_id) < std::tie(b.start, b.end, b.group_id);
  });
  return out;
}

std::vector<GroupMention> match(const corpus::Sentence& sentence, const GroupLexicon& lex,
                                std::string_view language, MatchStats* stats) {
  Matcher matcher(lex, language);
  if (!matcher.supported()) {
    if (stats) ++stats->unsupported_language;
    return {};
  }
  return matcher.match(sentence);
}

std::string mentions_to_jsonl(const std::vector<GroupMention>& mentions) {
  std::string out;
  for (const auto& m : mentions) {
    ojson j;
    j["sentence_id"] = m.sentence_id;
    j["group_id"] = m.group_id;
    j["matched_surface"] = m.matched_surface;
    j["char_span"] = {m.start, m.end};
    j["method"] = to_string(m.method);
    out += j.dump(-1, ' ', false, json::error_handler_t::replace) + "\n";
  }
  return out;
}

std::vector<GroupMention> mentions_from_jsonl(std::string_view content) {
  std::vector<GroupMention> out;
  auto lines = io::split_lines(content);
  for (size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    json j = json::parse(lines[i], nullptr, false);
    if (j.is_discarded()) throw ValidationError("malformed mention line " + std::to_string(i + 1));
    try {
      GroupMention m;
      m.sentence_id = j.at("sentence_id").get<std::string>();
      m.group_id = j.at("group_id").get<std::string>();
      m.matched_surface = j.at("matched_surface").get<std::string>();
      m.start = j.at("char_span").at(0).get<size_t>();
      m.end = j.at("char_span").at(1).get<size_t>();
      auto method = parse_method(j.at("method").get<std::string>());
      if (!method) throw ValidationError("unknown method on line " + std::to_string(i + 1));
      m.method = *method;
      out.push_back(std::move(m));
    } catch (const json::exception& e) {
      throw ValidationError("bad mention line " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace groupscope::lexicon
