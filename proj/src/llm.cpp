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

#include "groupscope/llm.hpp"

#include <algorithm>
#include <cstdlib>

#include "groupscope/io.hpp"
#include "groupscope/text.hpp"
#include "json.hpp"

namespace groupscope::llm {

using nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

constexpr std::string_view kPlaceholder = "{}";

constexpr const char* kGermanPrompt =
    "[INST] Eine soziale Gruppe ist eine Gruppe von Personen mit einem gemeinsamen Merkmal.\n"
    "Nenne die sozialen Gruppen in dieser Aussage, die explizit und direkt sprachlich genannt werden.\n"
    "Nenne auch die Gruppen, um die es implizit geht. Wenn es andere Nomen oder Begriffe gibt,\n"
    "nenne sie \"Sonstige\". Gibt mir den Output bitte als json Format und keinen weiteren Text.\n"
    "Die Aussage ist: {}[/INST]";

constexpr const char* kEnglishPrompt =
    "[INST] A social group is a group of people with a common characteristic. Name the social "
    "groups explicitly and directly mentioned in this statement. Also, name the groups that are "
    "implied. If there are other nouns or terms, call them \"Others\". Please provide the output "
    "in JSON format and no additional text. The statement is: {} [/INST]";

std::string dump(const ojson& j) { return j.dump(-1, ' ', false, json::error_handler_t::replace); }

size_t count_placeholders(std::string_view s) {
  size_t n = 0;
  for (size_t pos = s.find(kPlaceholder); pos != std::string_view::npos;
       pos = s.find(kPlaceholder, pos + kPlaceholder.size()))
    ++n;
  return n;
}

}  // namespace

PromptTemplate::PromptTemplate(std::string text, std::string language, std::string instruction_id)
    : text_(std::move(text)), language_(std::move(language)), instruction_id_(std::move(instruction_id)) {
  if (count_placeholders(text_) != 1)
    throw ValidationError("prompt template must contain exactly one {} placeholder");
}

PromptTemplate PromptTemplate::builtin(std::string_view language) {
  if (language == "de") return PromptTemplate(kGermanPrompt, "de", "social-groups-v1-de");
  if (language == "en") return PromptTemplate(kEnglishPrompt, "en", "social-groups-v1-en");
  throw ValidationError("no built-in prompt template for language \"" + std::string(language) +
                        "\"; supply a template file");
}

PromptTemplate PromptTemplate::load(const std::filesystem::path& path, std::string language) {
  std::string content = io::read_file(path);
  while (!content.empty() && (content.back() == '\n' || content.back() == '\r')) content.pop_back();
  return PromptTemplate(std::move(content), std::move(language), path.stem().string());
}

std::string PromptTemplate::render(std::string_view sentence) const {
  std::string out = text_;
  out.replace(out.find(kPlaceholder), kPlaceholder.size(), sentence);
  return out;
}

// ---------------------------------------------------------------------------
// Response parsing

namespace {

enum class Bucket { explicit_, implicit_, others, unknown };

Bucket bucket_for(const std::string& key) {
  std::string k;
  for (char c : text::normalize(key)) k.push_back(c == '_' || c == '-' ? ' ' : c);
  k = text::normalize(k);
  static const std::map<std::string, Bucket> aliases = {
      {"explizit", Bucket::explicit_},       {"explicit", Bucket::explicit_},
      {"explizite", Bucket::explicit_},      {"explizite gruppen", Bucket::explicit_},
      {"explicit groups", Bucket::explicit_}, {"explizit genannt", Bucket::explicit_},
      {"implizit", Bucket::implicit_},       {"implicit", Bucket::implicit_},
      {"implizite", Bucket::implicit_},      {"implizite gruppen", Bucket::implicit_},
      {"implicit groups", Bucket::implicit_}, {"implied", Bucket::implicit_},
      {"sonstige", Bucket::others},          {"sonstiges", Bucket::others},
      {"others", Bucket::others},            {"other", Bucket::others},
      {"andere", Bucket::others}};
  auto it = aliases.find(k);
  return it == aliases.end() ? Bucket::unknown : it->second;
}

void add_unique(std::vector<std::string>& list, const std::string& value) {
  if (std::find(list.begin(), list.end(), value) == list.end()) list.push_back(value);
}

// Maps a decoded object onto the three buckets. Returns false when no key is
// recognized.
bool interpret(const json& obj, ParseResult& out) {
  std::vector<std::string> buckets[3];
  bool recognized = false;
  for (const auto& [key, value] : obj.items()) {
    Bucket b = bucket_for(key);
    if (b == Bucket::unknown) {
      out.warnings.push_back("ignored key \"" + key + "\"");
      continue;
    }
    recognized = true;
    auto& list = buckets[static_cast<int>(b)];
    auto take = [&](const std::string& s) {
      std::string n = text::normalize(s);
      if (!n.empty()) add_unique(list, n);
    };
    if (value.is_string()) {
      take(value.get<std::string>());
    } else if (value.is_array()) {
      for (const auto& item : value) {
        if (item.is_string()) take(item.get<std::string>());
        else out.warnings.push_back("dropped non-string item in \"" + key + "\"");
      }
    } else if (!value.is_null()) {
      out.warnings.push_back("dropped non-list value of \"" + key + "\"");
    }
  }
  if (!recognized) return false;

  // Later buckets drop phrases already claimed by earlier ones.
  out.fields.explicit_groups = std::move(buckets[0]);
  for (auto& s : buckets[1])
    if (std::find(out.fields.explicit_groups.begin(), out.fields.explicit_groups.end(), s) ==
        out.fields.explicit_groups.end())
      out.fields.implicit_groups.push_back(s);
  for (auto& s : buckets[2])
    if (std::find(out.fields.explicit_groups.begin(), out.fields.explicit_groups.end(), s) ==
            out.fields.explicit_groups.end() &&
        std::find(out.fields.implicit_groups.begin(), out.fields.implicit_groups.end(), s) ==
            out.fields.implicit_groups.end())
      out.fields.others.push_back(s);
  out.ok = true;
  return true;
}

// End offset (exclusive) of the balanced object starting at `open`, if any.
std::optional<size_t> balanced_end(std::string_view s, size_t open) {
  int depth = 0;
  bool in_string = false;
  for (size_t i = open; i < s.size(); ++i) {
    char c = s[i];
    if (in_string) {
      if (c == '\\') ++i;
      else if (c == '"') in_string = false;
      continue;
    }
    if (c == '"') in_string = true;
    else if (c == '{') ++depth;
    else if (c == '}' && --depth == 0) return i + 1;
  }
  return std::nullopt;
}

}  // namespace

ParseResult parse_response(std::string_view raw) {
  ParseResult result;
  try {
    json whole = json::parse(raw, nullptr, false);
    if (!whole.is_discarded() && whole.is_object()) {
      ParseResult attempt;
      if (interpret(whole, attempt)) return attempt;
      result.warnings = attempt.warnings;
    }
    bool saw_object = false;
    for (size_t open = raw.find('{'); open != std::string_view::npos; open = raw.find('{', open + 1)) {
      auto end = balanced_end(raw, open);
      if (!end) continue;
      json candidate = json::parse(raw.substr(open, *end - open), nullptr, false);
      if (candidate.is_discarded() || !candidate.is_object()) continue;
      saw_object = true;
      ParseResult attempt;
      attempt.salvage_applied = true;
      if (interpret(candidate, attempt)) return attempt;
    }
    result.error = saw_object ? "no object with recognized keys" : "no balanced JSON object";
  } catch (const std::exception& e) {
    result.error = std::string("parser failure: ") + e.what();
  }
  result.ok = false;
  return result;
}

// ---------------------------------------------------------------------------
// Transports

HttpTransport::HttpTransport(HttpTransportConfig config, embed::HttpPost post)
    : config_(std::move(config)), post_(std::move(post)) {
  if (config_.token.empty()) {
    if (const char* t = std::getenv("GROUPSCOPE_LLM_TOKEN")) config_.token = t;
  }
  if (!post_) post_ = embed::make_http_post(config_.url, config_.token, config_.timeout_seconds);
}

std::string HttpTransport::complete(const LlmRequest& request) {
  ojson body;
  body["prompt"] = request.prompt;
  body["temperature"] = request.temperature;
  body["max_tokens"] = request.max_tokens;
  embed::HttpReply reply = post_(dump(body));
  if (reply.status == 0) throw TransientError("LLM endpoint unreachable: " + reply.body);
  if (reply.status == 429 || reply.status >= 500)
    throw TransientError("LLM endpoint returned HTTP " + std::to_string(reply.status));
  if (reply.status < 200 || reply.status >= 300)
    throw TransportError("LLM endpoint returned HTTP " + std::to_string(reply.status));
  json j = json::parse(reply.body, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("text") || !j["text"].is_string())
    throw TransportError("LLM endpoint response lacks a text field");
  return j["text"].get<std::string>();
}

std::vector<TranscriptEntry> load_transcripts(const std::filesystem::path& path) {
  std::vector<TranscriptEntry> out;
  auto lines = io::split_lines(io::read_file(path));
  for (size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    json j = json::parse(lines[i], nullptr, false);
    if (j.is_discarded() || !j.is_object())
      throw ValidationError(path.string() + ": malformed transcript line " + std::to_string(i + 1));
    TranscriptEntry e;
    e.sentence_id = j.value("sentence_id", "");
    e.prompt = j.value("prompt", "");
    e.raw_response = j.value("raw_response", "");
    e.timestamp = j.value("timestamp", "");
    out.push_back(std::move(e));
  }
  return out;
}

std::string serialize_transcript(const TranscriptEntry& entry) {
  ojson j;
  j["sentence_id"] = entry.sentence_id;
  j["prompt"] = entry.prompt;
  j["raw_response"] = entry.raw_response;
  j["timestamp"] = entry.timestamp;
  return dump(j);
}

ReplayTransport::ReplayTransport(std::vector<TranscriptEntry> entries) {
  for (auto& e : entries) {
    if (!e.prompt.empty()) by_prompt_.emplace(e.prompt, e.raw_response);
    if (!e.sentence_id.empty()) by_sentence_.emplace(e.sentence_id, e.raw_response);
  }
}

std::string ReplayTransport::complete(const LlmRequest& request) {
  if (auto it = by_prompt_.find(request.prompt); it != by_prompt_.end()) return it->second;
  if (auto it = by_sentence_.find(request.sentence_id); it != by_sentence_.end()) return it->second;
  throw TransportError("no recorded response for " + request.sentence_id);
}

CachingTransport::CachingTransport(std::shared_ptr<LlmTransport> inner, std::filesystem::path cache_file)
    : inner_(std::move(inner)), cache_file_(std::move(cache_file)) {
  if (std::filesystem::exists(cache_file_)) {
    for (auto& e : load_transcripts(cache_file_)) cache_.emplace(io::sha256_hex(e.prompt), std::move(e));
  }
}

std::string CachingTransport::complete(const LlmRequest& request) {
  std::string key = io::sha256_hex(request.prompt);
  {
    std::lock_guard lock(mu_);
    if (auto it = cache_.find(key); it != cache_.end()) {
      ++hits_;
      return it->second.raw_response;
    }
  }
  std::string response = inner_->complete(request);
  std::lock_guard lock(mu_);
  ++misses_;
  TranscriptEntry entry{request.sentence_id, request.prompt, response, io::utc_timestamp()};
  if (cache_.emplace(key, entry).second) io::append_line_durable(cache_file_, serialize_transcript(entry));
  return response;
}

void CachingTransport::compact() {
  std::lock_guard lock(mu_);
  std::string content;
  for (const auto& [key, entry] : cache_) content += serialize_transcript(entry) + "\n";
  io::write_atomic(cache_file_, content);
}

ExtractionResult extract(const corpus::Sentence& sentence, const PromptTemplate& tmpl,
                         LlmTransport& transport, const ExtractOptions& options) {
  if (text::trim(sentence.text).empty())
    throw ValidationError("cannot extract from an empty sentence " + sentence.sentence_id);
  LlmRequest request{sentence.sentence_id, tmpl.render(sentence.text), options.temperature,
                     options.max_tokens};
  std::string raw;
  int attempts = 0;
  std::string last_error;
  bool done = false;
  for (int attempt = 1; attempt <= options.retry.max_attempts && !done; ++attempt) {
    options.retry.wait_before(attempt);
    attempts = attempt;
    try {
      raw = transport.complete(request);
      done = true;
    } catch (const TransientError& e) {
      last_error = e.what();
    }
  }
  if (!done) {
    throw TransportError("LLM request for " + sentence.sentence_id + " failed after " +
                         std::to_string(attempts) + " attempts: " + last_error);
  }

  ParseResult parsed = parse_response(raw);
  if (!parsed.ok) throw ExtractionError(sentence.sentence_id, parsed.error, raw);

  ExtractionResult result;
  result.sentence_id = sentence.sentence_id;
  result.language = tmpl.language();
  result.explicit_groups = std::move(parsed.fields.explicit_groups);
  result.implicit_groups = std::move(parsed.fields.implicit_groups);
  result.others = std::move(parsed.fields.others);
  result.raw_response = std::move(raw);
  result.salvage_applied = parsed.salvage_applied;
  ojson meta;
  meta["instruction_id"] = tmpl.instruction_id();
  meta["temperature"] = options.temperature;
  meta["max_tokens"] = options.max_tokens;
  meta["attempts"] = attempts;
  meta["warnings"] = parsed.warnings;
  result.metadata = dump(meta);
  return result;
}

// ---------------------------------------------------------------------------
// Candidates

std::string_view to_string(Source s) { return s == Source::llm_explicit ? "llm_explicit" : "llm_implicit"; }

std::optional<Source> parse_source(std::string_view s) {
  if (s == "llm_explicit") return Source::llm_explicit;
  if (s == "llm_implicit") return Source::llm_implicit;
  return std::nullopt;
}

std::string_view to_string(ReviewStatus s) {
  switch (s) {
    case ReviewStatus::pending: return "pending";
    case ReviewStatus::accepted: return "accepted";
    case ReviewStatus::rejected: return "rejected";
  }
  return "pending";
}

std::optional<ReviewStatus> parse_review_status(std::string_view s) {
  if (s == "pending") return ReviewStatus::pending;
  if (s == "accepted") return ReviewStatus::accepted;
  if (s == "rejected") return ReviewStatus::rejected;
  return std::nullopt;
}

std::string candidate_id_for(std::string_view phrase, Source source) {
  std::string key(to_string(source));
  key.push_back('\x1f');
  key += phrase;
  return "c" + io::sha256_hex(key).substr(0, 12);
}

std::vector<CandidateGroup> aggregate(const std::vector<ExtractionResult>& results) {
  struct Acc {
    CandidateGroup group;
    std::map<std::string, size_t> languages;
  };
  std::map<std::pair<std::string, Source>, Acc> acc;
  auto add = [&](const ExtractionResult& r, const std::vector<std::string>& phrases, Source src) {
    for (const auto& p : phrases) {
      auto& a = acc[{p, src}];
      a.group.surface_phrase = p;
      a.group.source = src;
      a.group.sentence_ids.insert(r.sentence_id);
      ++a.group.occurrence_count;
      ++a.languages[r.language];
    }
  };
  for (const auto& r : results) {
    add(r, r.explicit_groups, Source::llm_explicit);
    add(r, r.implicit_groups, Source::llm_implicit);
  }
  std::vector<CandidateGroup> out;
  for (auto& [key, a] : acc) {
    a.group.candidate_id = candidate_id_for(key.first, key.second);
    size_t best = 0;
    for (const auto& [lang, n] : a.languages) {
      if (n > best) {
        best = n;
        a.group.language = lang;
      }
    }
    out.push_back(std::move(a.group));
  }
  std::stable_sort(out.begin(), out.end(), [](const CandidateGroup& a, const CandidateGroup& b) {
    if (a.occurrence_count != b.occurrence_count) return a.occurrence_count > b.occurrence_count;
    if (a.surface_phrase != b.surface_phrase) return a.surface_phrase < b.surface_phrase;
    return a.source < b.source;
  });
  return out;
}

std::string results_to_jsonl(const std::vector<ExtractionResult>& results) {
  std::string out;
  for (const auto& r : results) {
    ojson j;
    j["sentence_id"] = r.sentence_id;
    j["language"] = r.language;
    j["explicit_groups"] = r.explicit_groups;
    j["implicit_groups"] = r.implicit_groups;
    j["others"] = r.others;
    j["raw_response"] = r.raw_response;
    j["salvage_applied"] = r.salvage_applied;
    j["metadata"] = ojson::parse(r.metadata.empty() ? "{}" : r.metadata);
    out += dump(j) + "\n";
  }
  return out;
}

std::vector<ExtractionResult> results_from_jsonl(std::string_view content) {
  std::vector<ExtractionResult> out;
  auto lines = io::split_lines(content);
  for (size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    json j = json::parse(lines[i], nullptr, false);
    if (j.is_discarded()) throw ValidationError("malformed extraction line " + std::to_string(i + 1));
    try {
      ExtractionResult r;
      r.sentence_id = j.at("sentence_id").get<std::string>();
      r.language = j.value("language", "");
      r.explicit_groups = j.at("explicit_groups").get<std::vector<std::string>>();
      r.implicit_groups = j.at("implicit_groups").get<std::vector<std::string>>();
      r.others = j.at("others").get<std::vector<std::string>>();
      r.raw_response = j.value("raw_response", "");
      r.salvage_applied = j.value("salvage_applied", false);
      r.metadata = j.contains("metadata") ? j["metadata"].dump() : "{}";
      out.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw ValidationError("bad extraction line " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return out;
}

std::string candidates_to_jsonl(const std::vector<CandidateGroup>& candidates) {
  std::string out;
  for (const auto& c : candidates) {
    ojson j;
    j["candidate_id"] = c.candidate_id;
    j["surface_phrase"] = c.surface_phrase;
    j["source"] = to_string(c.source);
    j["language"] = c.language;
    j["sentence_ids"] = std::vector<std::string>(c.sentence_ids.begin(), c.sentence_ids.end());
    j["occurrence_count"] = c.occurrence_count;
    if (c.embedding) {
      ojson e;
      e["backend_id"] = c.embedding->backend_id;
      e["vector"] = c.embedding->vector;
      j["embedding"] = std::move(e);
    } else {
      j["embedding"] = nullptr;
    }
    ojson verdicts = ojson::object();
    for (const auto& v : c.verdicts) verdicts[v.classifier] = {{"accepted", v.accepted}, {"score", v.score}};
    j["verdicts"] = std::move(verdicts);
    j["review_status"] = to_string(c.review_status);
    out += dump(j) + "\n";
  }
  return out;
}

std::vector<CandidateGroup> candidates_from_jsonl(std::string_view content) {
  std::vector<CandidateGroup> out;
  auto lines = io::split_lines(content);
  for (size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    json j = json::parse(lines[i], nullptr, false);
    if (j.is_discarded()) throw ValidationError("malformed candidate line " + std::to_string(i + 1));
    try {
      CandidateGroup c;
      c.candidate_id = j.at("candidate_id").get<std::string>();
      c.surface_phrase = j.at("surface_phrase").get<std::string>();
      auto src = parse_source(j.at("source").get<std::string>());
      if (!src) throw ValidationError("unknown source on candidate line " + std::to_string(i + 1));
      c.source = *src;
      c.language = j.value("language", "");
      for (const auto& s : j.at("sentence_ids")) c.sentence_ids.insert(s.get<std::string>());
      c.occurrence_count = j.at("occurrence_count").get<size_t>();
      if (j.contains("embedding") && j["embedding"].is_object()) {
        c.embedding = embed::EmbeddingVector{c.surface_phrase,
                                             j["embedding"].at("vector").get<std::vector<double>>(),
                                             j["embedding"].value("backend_id", "")};
      }
      if (j.contains("verdicts") && j["verdicts"].is_object()) {
        for (const auto& [name, v] : j["verdicts"].items())
          c.verdicts.push_back({name, v.at("accepted").get<bool>(), v.at("score").get<double>()});
      }
      auto status = parse_review_status(j.value("review_status", "pending"));
      if (!status) throw ValidationError("unknown review_status on line " + std::to_string(i + 1));
      c.review_status = *status;
      out.push_back(std::move(c));
    } catch (const json::exception& e) {
      throw ValidationError("bad candidate line " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace groupscope::llm
