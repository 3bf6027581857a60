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

#ifndef GROUPSCOPE_LLM_HPP_
#define GROUPSCOPE_LLM_HPP_

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "groupscope/corpus.hpp"
#include "groupscope/embed.hpp"
#include "groupscope/error.hpp"

namespace groupscope::llm {

using embed::RetryPolicy;
using embed::TransientError;
using embed::TransportError;

class PromptTemplate {
 public:
  // Throws ValidationError unless `text` holds exactly one "{}" placeholder.
  PromptTemplate(std::string text, std::string language, std::string instruction_id);

  static PromptTemplate builtin(std::string_view language);  // "de" or "en"
  static PromptTemplate load(const std::filesystem::path& path, std::string language);

  std::string render(std::string_view sentence) const;
  const std::string& text() const { return text_; }
  const std::string& language() const { return language_; }
  const std::string& instruction_id() const { return instruction_id_; }

 private:
  std::string text_;
  std::string language_;
  std::string instruction_id_;
};

struct ExtractionFields {
  std::vector<std::string> explicit_groups;
  std::vector<std::string> implicit_groups;
  std::vector<std::string> others;
};

struct ParseResult {
  bool ok = false;
  ExtractionFields fields;
  bool salvage_applied = false;
  std::vector<std::string> warnings;
  std::string error;
};

// Total: never throws, whatever the input bytes.
ParseResult parse_response(std::string_view raw);

struct ExtractionResult {
  std::string sentence_id;
  std::string language;
  std::vector<std::string> explicit_groups;
  std::vector<std::string> implicit_groups;
  std::vector<std::string> others;
  std::string raw_response;
  bool salvage_applied = false;
  std::string metadata;  // JSON object: decoding parameters and attempts
};

class ExtractionError : public Error {
 public:
  ExtractionError(const std::string& sentence_id, const std::string& why, std::string raw)
      : Error("extraction failed for " + sentence_id + ": " + why), raw_response(std::move(raw)) {}
  std::string raw_response;
};

struct LlmRequest {
  std::string sentence_id;
  std::string prompt;
  double temperature = 0.0;
  int max_tokens = 256;
};

// Returns the completion text. Throws TransientError for retryable failures
// and TransportError otherwise. Implementations must be safe to call from
// several threads.
class LlmTransport {
 public:
  virtual ~LlmTransport() = default;
  virtual std::string complete(const LlmRequest& request) = 0;
};

struct HttpTransportConfig {
  std::string url;
  std::string token;  // defaults to GROUPSCOPE_LLM_TOKEN
  int timeout_seconds = 120;
};

class HttpTransport : public LlmTransport {
 public:
  explicit HttpTransport(HttpTransportConfig config, embed::HttpPost post = {});
  std::string complete(const LlmRequest& request) override;

 private:
  HttpTransportConfig config_;
  embed::HttpPost post_;
};

struct TranscriptEntry {
  std::string sentence_id;
  std::string prompt;
  std::string raw_response;
  std::string timestamp;
};

std::vector<TranscriptEntry> load_transcripts(const std::filesystem::path& path);
std::string serialize_transcript(const TranscriptEntry& entry);

// Serves recorded responses, matching on the exact prompt first and the
// sentence_id second.
class ReplayTransport : public LlmTransport {
 public:
  explicit ReplayTransport(std::vector<TranscriptEntry> entries);
  std::string complete(const LlmRequest& request) override;

 private:
  std::map<std::string, std::string> by_prompt_;
  std::map<std::string, std::string> by_sentence_;
};

// Consults a transcript cache keyed by prompt digest before calling `inner`;
// fresh responses are appended to the cache file.
class CachingTransport : public LlmTransport {
 public:
  CachingTransport(std::shared_ptr<LlmTransport> inner, std::filesystem::path cache_file);
  std::string complete(const LlmRequest& request) override;
  size_t hits() const { return hits_; }
  size_t misses() const { return misses_; }
  // Rewrites the cache file ordered by prompt digest.
  void compact();

 private:
  std::shared_ptr<LlmTransport> inner_;
  std::filesystem::path cache_file_;
  std::map<std::string, TranscriptEntry> cache_;  // prompt sha256 -> entry
  std::mutex mu_;
  size_t hits_ = 0;
  size_t misses_ = 0;
};

struct ExtractOptions {
  double temperature = 0.0;
  int max_tokens = 256;
  RetryPolicy retry;
};

ExtractionResult extract(const corpus::Sentence& sentence, const PromptTemplate& tmpl,
                         LlmTransport& transport, const ExtractOptions& options = {});

enum class Source { llm_explicit, llm_implicit };
std::string_view to_string(Source s);
std::optional<Source> parse_source(std::string_view s);

enum class ReviewStatus { pending, accepted, rejected };
std::string_view to_string(ReviewStatus s);
std::optional<ReviewStatus> parse_review_status(std::string_view s);

struct ClassifierVerdict {
  std::string classifier;  // avg_radius | max_radius | ocsvm
  bool accepted = false;
  double score = 0.0;
};

struct CandidateGroup {
  std::string candidate_id;
  std::string surface_phrase;  // normalized
  Source source = Source::llm_explicit;
  std::string language;
  std::set<std::string> sentence_ids;
  size_t occurrence_count = 0;
  std::optional<embed::EmbeddingVector> embedding;
  std::vector<ClassifierVerdict> verdicts;
  ReviewStatus review_status = ReviewStatus::pending;
};

std::string candidate_id_for(std::string_view phrase, Source source);

// Groups by (phrase, source); ordered by descending count, then phrase.
std::vector<CandidateGroup> aggregate(const std::vector<ExtractionResult>& results);

std::string results_to_jsonl(const std::vector<ExtractionResult>& results);
std::vector<ExtractionResult> results_from_jsonl(std::string_view content);
std::string candidates_to_jsonl(const std::vector<CandidateGroup>& candidates);
std::vector<CandidateGroup> candidates_from_jsonl(std::string_view content);

}  // namespace groupscope::llm

#endif  // GROUPSCOPE_LLM_HPP_
