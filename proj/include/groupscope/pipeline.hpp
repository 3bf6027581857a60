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

#ifndef GROUPSCOPE_PIPELINE_HPP_
#define GROUPSCOPE_PIPELINE_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "groupscope/corpus.hpp"
#include "groupscope/embed.hpp"
#include "groupscope/error.hpp"
#include "groupscope/esf.hpp"
#include "groupscope/lexicon.hpp"
#include "groupscope/llm.hpp"
#include "groupscope/metrics.hpp"

namespace groupscope::pipeline {

enum class Stage {
  ingest, label_dict, extract_llm, embed, esf_fit, esf_filter, expand_dict,
  salience, similarity, keyness, panel, regress, eval
};
std::string_view to_string(Stage s);  // CLI spelling, e.g. "label-dict"
std::optional<Stage> parse_stage(std::string_view s);
const std::vector<Stage>& all_stages();

// An existing run was produced under a different configuration.
class ConfigMismatchError : public Error {
 public:
  using Error::Error;
};

struct EmbeddingConfig {
  std::string backend = "test";  // file | test | http
  std::filesystem::path store;   // file backend
  std::string url;               // http backend
  size_t dimension = 16;         // test backend
  uint64_t seed = 0;             // test backend
  size_t batch_size = 32;
  size_t max_in_flight = 4;
};

struct LlmConfig {
  std::string transport = "replay";  // replay | http
  std::filesystem::path transcripts;
  std::string url;
  std::map<std::string, std::filesystem::path> prompts;  // language -> template file
  double temperature = 0.0;
  int max_tokens = 256;
  size_t workers = 4;
};

struct PipelineConfig {
  std::filesystem::path config_path;
  std::filesystem::path corpus_path;
  corpus::Format corpus_format = corpus::Format::jsonl;
  std::filesystem::path lexicon_path;
  std::filesystem::path journal_path;
  std::optional<std::filesystem::path> vote_history_path;
  std::optional<std::filesystem::path> gold_path;
  EmbeddingConfig embedding;
  LlmConfig llm;
  esf::Mode esf_mode = esf::Mode::avg_radius;
  esf::EsfOptions esf;
  metrics::SimilarityMode similarity_mode = metrics::SimilarityMode::share_renormalized;
  lexicon::Method detection = lexicon::Method::dictionary;  // mentions feeding salience
  std::filesystem::path output_dir;
  std::string digest;  // of the canonical JSON form
};

// Relative paths resolve against `base_dir`. Throws ValidationError when a
// referenced path is missing or a setting is out of range.
PipelineConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir);
PipelineConfig load_config(const std::filesystem::path& path);

struct StageRecord {
  std::string started;
  std::string finished;
  std::map<std::string, std::string> inputs;   // artifact -> sha256
  std::map<std::string, std::string> outputs;  // artifact -> sha256
  std::vector<std::string> warnings;
};

struct RunManifest {
  std::string run_id;
  std::string config_digest;
  int64_t lexicon_version = 0;
  std::map<std::string, std::string> inputs;  // input file -> sha256
  std::map<std::string, StageRecord> stages;
};

std::string serialize_manifest(const RunManifest& manifest);
RunManifest parse_manifest(std::string_view json_text);
std::filesystem::path manifest_path(const PipelineConfig& config);

struct RunOptions {
  bool force = false;     // run despite a config digest mismatch
  bool no_cache = false;  // bypass the LLM transcript cache
  // Injected backends; built from the configuration when null.
  std::shared_ptr<llm::LlmTransport> transport;
  std::shared_ptr<embed::Backend> embed_backend;
};

struct StageResult {
  Stage stage = Stage::ingest;
  std::map<std::string, std::string> outputs;
  std::vector<std::string> warnings;
  std::vector<std::string> notes;  // run-specific details kept out of the manifest
};

// Throws DependencyError("run <stage> first") when an upstream artifact is missing.
StageResult run_stage(Stage stage, const PipelineConfig& config, const RunOptions& options = {});
// Every stage in order; eval only when a gold file is configured.
std::vector<StageResult> run_all(const PipelineConfig& config, const RunOptions& options = {});

// Seed lexicon with the review journal replayed on top.
lexicon::GroupLexicon current_lexicon(const PipelineConfig& config);

// Lexicon synonyms that have an embedding, deduplicated and sorted by phrase.
std::vector<embed::EmbeddingVector> whitelist_embeddings(const lexicon::GroupLexicon& lex,
                                                         const embed::EmbeddingStore& store,
                                                         const std::string& backend_id);

// Salience profile serialization.
std::string profiles_to_jsonl(const std::vector<metrics::SalienceProfile>& profiles);
std::vector<metrics::SalienceProfile> profiles_from_jsonl(std::string_view content);

// Artifact file names inside the output directory.
namespace artifact {
inline constexpr const char* manifestos = "manifestos.jsonl";
inline constexpr const char* sentences = "sentences.jsonl";
inline constexpr const char* rejections = "rejections.jsonl";
inline constexpr const char* mentions_dictionary = "mentions_dictionary.jsonl";
inline constexpr const char* extractions = "extractions.jsonl";
inline constexpr const char* extraction_failures = "extraction_failures.jsonl";
inline constexpr const char* candidates = "candidates.jsonl";
inline constexpr const char* embeddings = "embeddings.tsv";
inline constexpr const char* embeddings_meta = "embeddings_meta.json";
inline constexpr const char* esf_model = "esf_model.json";
inline constexpr const char* candidates_filtered = "candidates_filtered.jsonl";
inline constexpr const char* lexicon_expanded = "lexicon_expanded.json";
inline constexpr const char* mentions_llm_esf = "mentions_llm_esf.jsonl";
inline constexpr const char* profiles = "profiles.jsonl";
inline constexpr const char* salience = "salience.csv";
inline constexpr const char* similarity = "similarity.csv";
inline constexpr const char* similarity_records = "similarity.jsonl";
inline constexpr const char* keyness = "keyness.csv";
inline constexpr const char* panel = "panel.csv";
inline constexpr const char* regression_text = "regression.txt";
inline constexpr const char* regression_csv = "regression.csv";
inline constexpr const char* eval_json = "eval.json";
inline constexpr const char* eval_text = "eval.txt";
inline constexpr const char* llm_cache = "llm_cache.jsonl";
inline constexpr const char* manifest = "manifest.json";
}  // namespace artifact

}  // namespace groupscope::pipeline

#endif  // GROUPSCOPE_PIPELINE_HPP_
