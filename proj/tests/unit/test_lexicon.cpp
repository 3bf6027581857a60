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

#include <doctest.h>

#include <algorithm>
#include <json.hpp>
#include <set>
#include <tuple>

#include "groupscope/corpus.hpp"
#include "groupscope/lexicon.hpp"
#include "groupscope/text.hpp"
#include "support.hpp"

namespace lx = groupscope::lexicon;
namespace text = groupscope::text;

namespace {

lx::GroupLexicon seed() { return lx::load_lexicon(testing::seed_lexicon()); }

lx::ExpansionEvent event(uint64_t id, const std::string& phrase, const std::string& lang, lx::Decision d,
                         const std::string& target = "") {
  lx::ExpansionEvent e;
  e.event_id = id;
  e.timestamp = "2026-01-01T00:00:00Z";
  e.surface_phrase = phrase;
  e.language = lang;
  e.decision = d;
  e.target_group_id = target;
  e.reviewer = "tester";
  return e;
}

struct Span {
  std::string group;
  size_t start, end;
  auto operator<=>(const Span&) const = default;
};

// Tries every synonym at every offset; a space in a synonym matches a run of
// white space. Overlaps within one group keep the longest hit.
std::vector<Span> naive_scan(const std::string& sentence, const lx::GroupLexicon& lex, const std::string& lang) {
  std::u32string s = text::decode_utf8(text::nfc(sentence));
  for (auto& c : s) c = text::to_lower(c);
  auto letter = [&](size_t i) { return i < s.size() && text::is_letter(s[i]); };
  std::vector<Span> out;
  for (const auto& [gid, entry] : lex.entries) {
    auto it = entry.synonyms.find(lang);
    if (it == entry.synonyms.end()) continue;
    std::vector<Span> hits;
    for (const auto& syn : it->second) {
      std::u32string p = text::decode_utf8(syn);
      for (size_t start = 0; start < s.size(); ++start) {
        if (start > 0 && letter(start - 1) && letter(start)) continue;
        size_t i = start, k = 0;
        while (k < p.size() && i < s.size()) {
          if (p[k] == U' ') {
            if (!text::is_space(s[i])) break;
            while (i < s.size() && text::is_space(s[i])) ++i;
            ++k;
          } else if (p[k] == s[i]) {
            ++i, ++k;
          } else {
            break;
          }
        }
        if (k != p.size()) continue;
        if (letter(i - 1) && letter(i)) continue;
        hits.push_back({gid, start, i});
      }
    }
    std::sort(hits.begin(), hits.end(), [](const Span& a, const Span& b) {
      return std::make_tuple(b.end - b.start, a.start) < std::make_tuple(a.end - a.start, b.start);
    });
    std::vector<Span> kept;
    for (const auto& h : hits) {
      bool overlap = std::any_of(kept.begin(), kept.end(),
                                 [&](const Span& k) { return h.start < k.end && k.start < h.end; });
      if (!overlap) kept.push_back(h);
    }
    out.insert(out.end(), kept.begin(), kept.end());
  }
  std::sort(out.begin(), out.end(), [](const Span& a, const Span& b) {
    return std::tie(a.start, a.end, a.group) < std::tie(b.start, b.end, b.group);
  });
  return out;
}

std::vector<Span> spans_of(const std::vector<lx::GroupMention>& mentions) {
  std::vector<Span> out;
  for (const auto& m : mentions) out.push_back({m.group_id, m.start, m.end});
  return out;
}

groupscope::corpus::Sentence sentence(const std::string& text, const std::string& id = "s-0") {
  return {id, "doc", 0, text};
}

}  // namespace

TEST_SUITE("lexicon") {
  TEST_CASE("seed lexicon is valid and has 22 groups") {
    auto lex = seed();
    CHECK(lex.entries.size() == 22);
    CHECK(lex.version == 0);
    CHECK_NOTHROW(lx::validate(lex));
    CHECK(lex.languages() == std::set<std::string>{"de", "en"});
  }

  TEST_CASE("40-sentence fixture matches hand spans and the naive scan") {
    auto lex = seed();
    auto cases = nlohmann::json::parse(testing::slurp(testing::fixtures() / "unit" / "match.json"));
    REQUIRE(cases.size() == 40);
    for (const auto& c : cases) {
      std::string t = c["text"], lang = c["language"];
      CAPTURE(t);
      auto got = lx::match(sentence(t), lex, lang);
      std::vector<Span> hand;
      for (const auto& m : c["mentions"]) hand.push_back({m[0], m[2], m[3]});
      std::sort(hand.begin(), hand.end(), [](const Span& a, const Span& b) {
        return std::tie(a.start, a.end, a.group) < std::tie(b.start, b.end, b.group);
      });
      CHECK(spans_of(got) == hand);
      CHECK(spans_of(got) == naive_scan(t, lex, lang));
      for (const auto& m : got) {
        auto cps = text::decode_utf8(text::nfc(t));
        CHECK(m.end <= cps.size());
        CHECK(m.matched_surface == text::encode_utf8(std::u32string_view(cps).substr(m.start, m.end - m.start)));
        CHECK(lex.owner(lang, text::normalize(m.matched_surface)) == m.group_id);
      }
    }
  }

  TEST_CASE("spec examples") {
    auto lex = seed();
    auto groups = [&](const std::string& t) {
      std::set<std::string> g;
      for (const auto& m : lx::match(sentence(t), lex, "de")) g.insert(m.group_id);
      return g;
    };
    CHECK(groups("Wir unterstützen Arbeiter und Rentner.") == std::set<std::string>{"manual_workers", "older_people"});
    CHECK(groups("Die Inflation steigt.").empty());
    CHECK(groups("ARBEITER zuerst!") == std::set<std::string>{"manual_workers"});
  }

  TEST_CASE("unsupported language counts a warning") {
    lx::MatchStats stats;
    CHECK(lx::match(sentence("Les agriculteurs."), seed(), "fr", &stats).empty());
    CHECK(stats.unsupported_language == 1);
  }

  TEST_CASE("accept as synonym grows the set and bumps the version") {
    auto lex = seed();
    size_t before = lex.entries.at("care_workers").synonyms.at("de").size();
    auto next = lx::apply_expansion(lex, event(1, "Pflegekräfte", "de", lx::Decision::accept_as_synonym, "care_workers"));
    CHECK(next.entries.at("care_workers").synonyms.at("de").size() == before + 1);
    CHECK(next.version == lex.version + 1);
    CHECK(next.journal.size() == 1);
    CHECK(next.owner("de", "pflegekräfte") == "care_workers");
    CHECK(lex.owner("de", "pflegekräfte") == std::nullopt);
  }

  TEST_CASE("accept as new group") {
    auto next = lx::apply_expansion(seed(), event(1, "Grenzgänger", "de", lx::Decision::accept_as_new_group));
    auto gid = next.owner("de", "grenzgänger");
    REQUIRE(gid.has_value());
    CHECK(next.entries.at(*gid).canonical_label == "Grenzgänger");
    CHECK(next.entries.size() == 23);
    CHECK_NOTHROW(lx::validate(next));
  }

  TEST_CASE("collision names both groups") {
    try {
      lx::apply_expansion(seed(), event(1, "Arbeiter", "de", lx::Decision::accept_as_synonym, "farmers"));
      FAIL("expected a collision");
    } catch (const lx::CollisionError& e) {
      CHECK(e.existing_group == "manual_workers");
      CHECK(e.requested_group == "farmers");
      std::string what = e.what();
      CHECK(what.find("manual_workers") != std::string::npos);
      CHECK(what.find("farmers") != std::string::npos);
    }
  }

  TEST_CASE("unknown target is a validation error") {
    CHECK_THROWS_AS(lx::apply_expansion(seed(), event(1, "x", "de", lx::Decision::accept_as_synonym, "nope")),
                    groupscope::ValidationError);
  }

  TEST_CASE("reject changes only the journal") {
    auto lex = seed();
    auto next = lx::apply_expansion(lex, event(1, "Budget", "de", lx::Decision::reject));
    CHECK(next.entries == lex.entries);
    CHECK(next.version == lex.version);
    CHECK(next.journal.size() == 1);
  }

  TEST_CASE("replay") {
    auto s = seed();
    CHECK(lx::replay(s, {}) == s);
    std::vector<lx::ExpansionEvent> journal = {
        event(1, "Pflegekräfte", "de", lx::Decision::accept_as_synonym, "care_workers"),
        event(2, "Grenzgänger", "de", lx::Decision::accept_as_new_group),
        event(3, "bin men", "en", lx::Decision::accept_as_synonym, "manual_workers")};
    auto replayed = lx::replay(s, journal);
    CHECK(replayed.version == s.version + 3);

    auto incremental = s;
    for (const auto& e : journal) incremental = lx::apply_expansion(incremental, e);
    CHECK(lx::serialize_lexicon(replayed) == lx::serialize_lexicon(incremental));

    auto shuffled = journal;
    std::swap(shuffled[0], shuffled[2]);
    try {
      lx::replay(s, shuffled);
      FAIL("expected replay to abort");
    } catch (const lx::ReplayError& e) {
      CHECK(e.event_id == 2);
    }
  }

  TEST_CASE("serialization round trip") {
    auto lex = lx::apply_expansion(seed(), event(1, "Grenzgänger", "de", lx::Decision::accept_as_new_group));
    auto again = lx::parse_lexicon(lx::serialize_lexicon(lex));
    CHECK(lx::serialize_lexicon(again) == lx::serialize_lexicon(lex));
    auto journal = lx::parse_journal(lx::serialize_journal(lex.journal));
    CHECK(journal.size() == 1);
    CHECK(journal[0].surface_phrase == "Grenzgänger");
  }

  TEST_CASE("invalid lexicon files are rejected") {
    CHECK_THROWS_AS(lx::parse_lexicon(R"({"version":0,"entries":[{"group_id":"a","canonical_label":"x",)"
                                      R"("category":"other","synonyms":{"en":["y"]}}]})"),
                    groupscope::ValidationError);
    CHECK_THROWS_AS(lx::parse_lexicon(R"({"version":0,"entries":[)"
                                      R"({"group_id":"a","canonical_label":"x","category":"other","synonyms":{"en":["x"]}},)"
                                      R"({"group_id":"b","canonical_label":"y","category":"other","synonyms":{"en":["y","x"]}}]})"),
                    groupscope::ValidationError);
  }
}
