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

#include "groupscope/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "groupscope/io.hpp"
#include "groupscope/text.hpp"
#include "json.hpp"

namespace groupscope::corpus {

using nlohmann::json;

std::string_view to_string(PartyFamily f) {
  switch (f) {
    case PartyFamily::CentreLeft: return "CentreLeft";
    case PartyFamily::CentreRight: return "CentreRight";
    case PartyFamily::RadicalRight: return "RadicalRight";
    case PartyFamily::Other: return "Other";
  }
  return "Other";
}

std::optional<PartyFamily> parse_party_family(std::string_view s) {
  if (s == "CentreLeft") return PartyFamily::CentreLeft;
  if (s == "CentreRight") return PartyFamily::CentreRight;
  if (s == "RadicalRight") return PartyFamily::RadicalRight;
  if (s == "Other") return PartyFamily::Other;
  return std::nullopt;
}

std::optional<Date> Date::parse(std::string_view iso) {
  if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') return std::nullopt;
  auto num = [&](size_t pos, size_t len) -> int {
    int v = 0;
    for (size_t i = pos; i < pos + len; ++i) {
      if (iso[i] < '0' || iso[i] > '9') return -1;
      v = v * 10 + (iso[i] - '0');
    }
    return v;
  };
  Date d{num(0, 4), num(5, 2), num(8, 2)};
  if (d.year < 0 || d.month < 1 || d.month > 12 || d.day < 1) return std::nullopt;
  static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  int max_day = kDays[d.month - 1];
  bool leap = (d.year % 4 == 0 && d.year % 100 != 0) || d.year % 400 == 0;
  if (d.month == 2 && leap) max_day = 29;
  if (d.day > max_day) return std::nullopt;
  return d;
}

std::string Date::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
  return buf;
}

std::string Manifesto::election_id() const { return country + "-" + election_date.to_string(); }

std::string make_sentence_id(std::string_view doc_id, size_t index) {
  return std::string(doc_id) + ":" + std::to_string(index);
}

const Manifesto* Corpus::find(std::string_view doc_id) const {
  for (const auto& m : manifestos)
    if (m.doc_id == doc_id) return &m;
  return nullptr;
}

std::optional<Format> parse_format(std::string_view s) {
  if (s == "jsonl") return Format::jsonl;
  if (s == "csv") return Format::csv;
  return std::nullopt;
}

DuplicateDocIdError::DuplicateDocIdError(const std::string& id, size_t first, size_t second)
    : ValidationError("duplicate doc_id \"" + id + "\" on lines " + std::to_string(first) +
                      " and " + std::to_string(second)),
      doc_id(id),
      first_line(first),
      second_line(second) {}

namespace {

// A record field as read from either format. CSV cells arrive as text and
// are coerced here so both formats share one validation path.
struct RawField {
  bool present = false;
  json value;
};

using RawRecord = std::unordered_map<std::string, RawField>;

bool is_lower_alpha(std::string_view s, size_t n) {
  return s.size() == n && std::all_of(s.begin(), s.end(), [](char c) { return c >= 'a' && c <= 'z'; });
}
bool is_upper_alpha(std::string_view s, size_t n) {
  return s.size() == n && std::all_of(s.begin(), s.end(), [](char c) { return c >= 'A' && c <= 'Z'; });
}

// Returns an error reason, or empty on success.
std::string validate(const RawRecord& rec, Manifesto& out) {
  auto get_string = [&](const char* name, std::string& dst, bool required) -> std::string {
    auto it = rec.find(name);
    if (it == rec.end() || !it->second.present || it->second.value.is_null()) {
      return required ? std::string("missing ") + name : std::string();
    }
    if (!it->second.value.is_string()) return std::string(name) + " must be a string";
    dst = it->second.value.get<std::string>();
    if (required && dst.empty()) return std::string("missing ") + name;
    return {};
  };

  if (auto e = get_string("doc_id", out.doc_id, true); !e.empty()) return e;
  if (auto e = get_string("party_id", out.party_id, true); !e.empty()) return e;

  std::string family;
  if (auto e = get_string("party_family", family, true); !e.empty()) return e;
  auto pf = parse_party_family(family);
  if (!pf) return "unknown party_family \"" + family + "\"";
  out.party_family = *pf;

  if (auto e = get_string("country", out.country, true); !e.empty()) return e;
  if (!is_upper_alpha(out.country, 2)) return "country must be ISO 3166-1 alpha-2: \"" + out.country + "\"";

  std::string date;
  if (auto e = get_string("election_date", date, true); !e.empty()) return e;
  auto d = Date::parse(date);
  if (!d) return "unparseable election_date \"" + date + "\"";
  out.election_date = *d;

  if (auto e = get_string("language", out.language, true); !e.empty()) return e;
  if (!is_lower_alpha(out.language, 2)) return "language must be ISO 639-1: \"" + out.language + "\"";

  if (auto it = rec.find("vote_share_pct"); it != rec.end() && it->second.present &&
                                            !it->second.value.is_null()) {
    if (!it->second.value.is_number()) return "vote_share_pct must be a number";
    double v = it->second.value.get<double>();
    if (!std::isfinite(v) || v < 0.0 || v > 100.0) return "vote_share_pct outside [0,100]";
    out.vote_share_pct = v;
  }
  if (auto it = rec.find("in_government_prior"); it != rec.end() && it->second.present &&
                                                 !it->second.value.is_null()) {
    if (!it->second.value.is_boolean()) return "in_government_prior must be a boolean";
    out.in_government_prior = it->second.value.get<bool>();
  }
  std::string text;
  if (auto e = get_string("full_text", text, false); !e.empty()) return e;
  if (rec.find("full_text") == rec.end() || !rec.at("full_text").present) return "missing full_text";
  out.full_text = std::move(text);
  return {};
}

class Collector {
 public:
  void add(const RawRecord& rec, size_t line_no, Corpus& corpus) {
    // Duplicate detection runs before validation so a later malformed row
    // cannot hide a clash.
    if (auto it = rec.find("doc_id"); it != rec.end() && it->second.value.is_string()) {
      std::string id = it->second.value.get<std::string>();
      if (!id.empty()) {
        auto [pos, inserted] = seen_.emplace(id, line_no);
        if (!inserted) throw DuplicateDocIdError(id, pos->second, line_no);
      }
    }
    Manifesto m;
    std::string reason = validate(rec, m);
    if (!reason.empty()) {
      corpus.rejections.push_back({line_no, reason});
      return;
    }
    corpus.manifestos.push_back(std::move(m));
  }

 private:
  std::unordered_map<std::string, size_t> seen_;
};

}  // namespace

Corpus ingest_jsonl(std::string_view content) {
  Corpus corpus;
  Collector collector;
  auto lines = io::split_lines(content);
  for (size_t i = 0; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    json obj = json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) {
      corpus.rejections.push_back({i + 1, "malformed JSON object"});
      continue;
    }
    RawRecord rec;
    for (auto& [key, value] : obj.items()) rec[key] = RawField{true, value};
    collector.add(rec, i + 1, corpus);
  }
  return corpus;
}

Corpus ingest_csv(std::string_view content) {
  Corpus corpus;
  Collector collector;
  io::CsvTable table = io::parse_csv(content);
  for (size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    size_t line_no = table.row_lines[r];
    if (row.size() != table.header.size()) {
      corpus.rejections.push_back({line_no, "expected " + std::to_string(table.header.size()) +
                                                " fields, found " + std::to_string(row.size())});
      continue;
    }
    RawRecord rec;
    std::string coerce_error;
    for (size_t c = 0; c < row.size(); ++c) {
      const std::string& name = table.header[c];
      const std::string& cell = row[c];
      RawField f{true, json(cell)};
      if (name == "vote_share_pct") {
        if (cell.empty()) {
          f.value = nullptr;
        } else {
          char* end = nullptr;
          double v = std::strtod(cell.c_str(), &end);
          if (end != cell.c_str() + cell.size()) {
            coerce_error = "vote_share_pct must be a number";
          }
          f.value = v;
        }
      } else if (name == "in_government_prior") {
        if (cell.empty()) f.value = nullptr;
        else if (cell == "true" || cell == "1") f.value = true;
        else if (cell == "false" || cell == "0") f.value = false;
        else coerce_error = "in_government_prior must be a boolean";
      }
      rec[name] = std::move(f);
    }
    if (!coerce_error.empty()) {
      corpus.rejections.push_back({line_no, coerce_error});
      continue;
    }
    collector.add(rec, line_no, corpus);
  }
  return corpus;
}

Corpus ingest(const std::filesystem::path& path, Format format) {
  std::string content = io::read_file(path);
  return format == Format::jsonl ? ingest_jsonl(content) : ingest_csv(content);
}

std::string to_jsonl(const std::vector<Manifesto>& manifestos) {
  std::string out;
  for (const auto& m : manifestos) {
    nlohmann::ordered_json j;
    j["doc_id"] = m.doc_id;
    j["party_id"] = m.party_id;
    j["party_family"] = to_string(m.party_family);
    j["country"] = m.country;
    j["election_date"] = m.election_date.to_string();
    j["language"] = m.language;
    j["vote_share_pct"] = m.vote_share_pct ? json(*m.vote_share_pct) : json(nullptr);
    j["in_government_prior"] = m.in_government_prior ? json(*m.in_government_prior) : json(nullptr);
    j["full_text"] = m.full_text;
    out += j.dump(-1, ' ', false, json::error_handler_t::replace);
    out.push_back('\n');
  }
  return out;
}

std::string rejections_to_jsonl(const std::vector<Rejection>& rejections) {
  std::string out;
  for (const auto& r : rejections) {
    nlohmann::ordered_json j;
    j["line_no"] = r.line_no;
    j["reason"] = r.reason;
    out += j.dump(-1, ' ', false, json::error_handler_t::replace);
    out.push_back('\n');
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sentence splitting

const std::set<std::string>& builtin_abbreviations(std::string_view language) {
  static const std::set<std::string> de = {
      "abb", "abs", "bspw", "bzgl", "bzw", "ca", "dr", "evtl", "gegr", "ggf", "gem", "hrsg", "inkl",
      "insb", "jh", "mio", "mrd", "nr", "prof", "sog", "str", "tsd", "usw", "vgl", "zzgl"};
  static const std::set<std::string> en = {"approx", "co", "corp", "dept", "dr", "fig", "gov",
                                           "inc", "jr", "ltd", "mr", "mrs", "ms", "prof",
                                           "sr", "st", "vs"};
  static const std::set<std::string> none;
  if (language == "de") return de;
  if (language == "en") return en;
  return none;
}

namespace {

bool is_line_break(char32_t c) { return c == U'\n' || c == U'\r' || c == 0x2028 || c == 0x2029; }
bool is_terminal(char32_t c) { return c == U'.' || c == U'!' || c == U'?' || c == U'…'; }
bool is_closer(char32_t c) {
  switch (c) {
    case U'"': case U'\'': case U')': case U']': case U'»': case U'«':
    case U'“': case U'”': case U'’': case U'‘':
      return true;
    default:
      return false;
  }
}

class LineSplitter {
 public:
  LineSplitter(std::string_view language, const SplitOptions& options)
      : language_(language), builtin_(builtin_abbreviations(language)) {
    if (auto it = options.extra_abbreviations.find(std::string(language));
        it != options.extra_abbreviations.end()) {
      extra_ = &it->second;
    }
  }

  void split(const std::u32string& line, std::vector<std::string>& out) const {
    size_t start = 0;
    size_t i = 0;
    while (i < line.size()) {
      if (!is_terminal(line[i])) {
        ++i;
        continue;
      }
      size_t run_begin = i;
      while (i < line.size() && is_terminal(line[i])) ++i;
      size_t run_end = i;
      while (i < line.size() && is_closer(line[i])) ++i;
      bool at_end = i == line.size();
      if (!at_end && line[i] != U' ') continue;
      if (!boundary(line, run_begin, run_end, i)) continue;
      emit(line, start, i, out);
      start = i;
    }
    emit(line, start, line.size(), out);
  }

 private:
  bool boundary(const std::u32string& line, size_t run_begin, size_t run_end, size_t after) const {
    std::u32string_view run(line.data() + run_begin, run_end - run_begin);
    bool ellipsis = run.find(U'…') != std::u32string_view::npos ||
                    run.find(U"...") != std::u32string_view::npos;
    if (ellipsis) {
      // Mid-sentence ellipses are followed by lowercase text.
      size_t next = after;
      while (next < line.size() && line[next] == U' ') ++next;
      return next == line.size() || !text::is_letter(line[next]) || text::is_upper(line[next]);
    }
    if (run != U".") return true;

    size_t w = run_begin;
    while (w > 0 && text::is_letter(line[w - 1])) --w;
    size_t letters = run_begin - w;
    if (letters == 1) return false;
    if (letters > 1) {
      std::u32string word;
      for (size_t k = w; k < run_begin; ++k) word.push_back(text::to_lower(line[k]));
      std::string key = text::encode_utf8(word);
      if (builtin_.count(key) || (extra_ && extra_->count(key))) return false;
      return true;
    }
    // German ordinals: "am 3. Oktober".
    if (language_ == "de") {
      size_t d = run_begin;
      while (d > 0 && text::is_digit(line[d - 1])) --d;
      size_t digits = run_begin - d;
      bool token_start = d == 0 || line[d - 1] == U' ' || line[d - 1] == U'(';
      if (digits >= 1 && digits <= 2 && token_start) return false;
    }
    return true;
  }

  static void emit(const std::u32string& line, size_t b, size_t e, std::vector<std::string>& out) {
    while (b < e && line[b] == U' ') ++b;
    while (e > b && line[e - 1] == U' ') --e;
    if (b < e) out.push_back(text::encode_utf8(std::u32string_view(line).substr(b, e - b)));
  }

  std::string language_;
  const std::set<std::string>& builtin_;
  const std::set<std::string>* extra_ = nullptr;
};

}  // namespace

std::vector<std::string> split_text(std::string_view input, std::string_view language,
                                    const SplitOptions& options) {
  std::u32string cps = text::decode_utf8(text::nfc(input));
  LineSplitter splitter(language, options);
  std::vector<std::string> out;
  std::u32string line;
  auto flush = [&] {
    // Collapse white space inside the line; case is untouched.
    std::u32string collapsed;
    bool pending = false;
    for (char32_t c : line) {
      if (text::is_space(c)) {
        pending = !collapsed.empty();
        continue;
      }
      if (pending) collapsed.push_back(U' ');
      pending = false;
      collapsed.push_back(c);
    }
    if (!collapsed.empty()) splitter.split(collapsed, out);
    line.clear();
  };
  for (char32_t c : cps) {
    if (is_line_break(c)) flush();
    else line.push_back(c);
  }
  flush();
  return out;
}

std::vector<Sentence> split_sentences(const Manifesto& m, std::vector<std::string>* warnings,
                                      const SplitOptions& options) {
  std::vector<Sentence> out;
  if (text::trim(m.full_text).empty()) {
    if (warnings) warnings->push_back("document " + m.doc_id + " has empty full_text");
    return out;
  }
  auto texts = split_text(m.full_text, m.language, options);
  out.reserve(texts.size());
  for (size_t i = 0; i < texts.size(); ++i) {
    out.push_back(Sentence{make_sentence_id(m.doc_id, i), m.doc_id, i, std::move(texts[i])});
  }
  return out;
}

std::string sentences_to_jsonl(const std::vector<Sentence>& sentences) {
  std::string out;
  for (const auto& s : sentences) {
    nlohmann::ordered_json j;
    j["sentence_id"] = s.sentence_id;
    j["doc_id"] = s.doc_id;
    j["index"] = s.index;
    j["text"] = s.text;
    out += j.dump(-1, ' ', false, json::error_handler_t::replace);
    out.push_back('\n');
  }
  return out;
}

std::vector<Sentence> sentences_from_jsonl(std::string_view content) {
  std::vector<Sentence> out;
  auto lines = io::split_lines(content);
  for (size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    json j = json::parse(lines[i], nullptr, false);
    if (j.is_discarded() || !j.is_object())
      throw ValidationError("malformed sentence record on line " + std::to_string(i + 1));
    try {
      out.push_back(Sentence{j.at("sentence_id").get<std::string>(), j.at("doc_id").get<std::string>(),
                             j.at("index").get<size_t>(), j.at("text").get<std::string>()});
    } catch (const json::exception& e) {
      throw ValidationError("bad sentence record on line " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace groupscope::corpus
