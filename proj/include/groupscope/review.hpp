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

#ifndef GROUPSCOPE_REVIEW_HPP_
#define GROUPSCOPE_REVIEW_HPP_

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "groupscope/embed.hpp"
#include "groupscope/esf.hpp"
#include "groupscope/lexicon.hpp"
#include "groupscope/llm.hpp"
#include "groupscope/pipeline.hpp"

namespace groupscope::review {

struct ApiResponse {
  int status = 200;
  std::string body;  // JSON
};

// Appends one journal line durably; replaceable so tests can inject failures.
using JournalAppend = std::function<void(const std::filesystem::path&, std::string_view)>;

// Review state over a completed esf-filter stage. The candidate pool is the
// ESF-accepted phrases not already in the seed lexicon; their statuses and
// the lexicon follow from replaying the journal.
class ReviewService {
 public:
  explicit ReviewService(const pipeline::PipelineConfig& config, JournalAppend append = {});

  ApiResponse list_candidates(const std::string& status, const std::string& sort,
                              std::optional<size_t> limit) const;
  ApiResponse decide(const std::string& candidate_id, std::string_view body);
  ApiResponse recompute();
  ApiResponse lexicon() const;
  ApiResponse stats() const;

  lexicon::GroupLexicon current_lexicon() const;
  std::string model_digest() const;
  // Pending candidate ids by ascending distance to the current center.
  std::vector<std::string> pending_order() const;

 private:
  struct Candidate {
    llm::CandidateGroup group;
    std::vector<double> vector;  // empty when the phrase has no embedding
  };

  llm::ReviewStatus status_of(const Candidate& c) const;
  double distance_of(const Candidate& c) const;
  std::vector<const Candidate*> ranked(llm::ReviewStatus status, const std::string& sort) const;
  std::string candidate_json(const Candidate& c) const;
  ApiResponse error(int status, const std::string& message) const;

  pipeline::PipelineConfig config_;
  JournalAppend append_;
  lexicon::GroupLexicon seed_;
  lexicon::GroupLexicon lex_;
  embed::EmbeddingStore store_;
  std::string backend_id_;
  esf::EsfModel model_;
  std::vector<Candidate> candidates_;
  std::map<std::string, size_t> by_id_;
  std::map<std::string, std::string> sentence_text_;
  mutable std::shared_mutex mu_;
};

// Minimal HTTP front end for a ReviewService.
class ReviewServer {
 public:
  explicit ReviewServer(ReviewService& service);
  ~ReviewServer();
  // Returns the bound port, or -1.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  bool listen();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace groupscope::review

#endif  // GROUPSCOPE_REVIEW_HPP_
