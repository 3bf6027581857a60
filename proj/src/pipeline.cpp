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

#include "groupscope/pipeline.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <functional>
#include <json.hpp>
#include <set>
#include <thread>

#include "groupscope/econometrics.hpp"
#include "groupscope/evalkit.hpp"
#include "groupscope/io.hpp"
#include "groupscope/text.hpp"

namespace groupscope::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

struct StageInfo {
  Stage stage;
  const char* name;
};

const StageInfo kStages[] = {
    {Stage::ingest, "ingest"},         {Stage::label_dict, "label-dict"},
    {Stage::extract_llm, "extract-llm"}, {Stage::embed, "embed"},
    {Stage::esf_fit, "esf-fit"},       {Stage::esf_filter, "esf-filter"},
    {Stage::expand_dict, "expand-dict"}, {Stage::salience, "salience"},
    {Stage::similarity, "similarity"}, {Stage::keyness, "keyness"},
    {Stage::panel, "panel"},           {Stage::regress, "regress"},
    {Stage::eval, "eval"},
};

}  // namespace

std::string_view to_string(Stage s) {
  for (const auto& info : kStages)
    if (info.stage == s) return info.name;
  return "?";
}

std::optional<Stage> parse_stage(std::string_view s) {
  for (const auto& info : kStages)
    if (s == info.name) return info.stage;
  return std::nullopt;
}

const std::vector<Stage>& all_stages() {
  static const std::vector<Stage> stages = [] {
    std::vector<Stage> v;
    for (const auto& info : kStages) v.push_back(info.stage);
    return v;
  }();
  return stages;
}

// ---------------------------------------------------------------------------
// Configuration

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

void require_exists(const fs::path& p, const std::string& what) {
  if (!fs::exists(p)) throw ValidationError(what + " not found: " + p.string());
}

}  // namespace

PipelineConfig parse_config(std::string_view json_text, const fs::path& base_dir) {
  json j = json::parse(json_text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ValidationError("config is not a JSON object");
  PipelineConfig c;
  try {
    c.digest = io::sha256_hex(j.dump());

    const auto& corpus = j.at("corpus");
    c.corpus_path = resolve(base_dir, corpus.at("path").get<std::string>());
    auto fmt = corpus::parse_format(corpus.value("format", "jsonl"));
    if (!fmt) throw ValidationError("corpus.format must be jsonl or csv");
    c.corpus_format = *fmt;
    require_exists(c.corpus_path, "corpus");

    c.lexicon_path = resolve(base_dir, j.at("lexicon").get<std::string>());
    require_exists(c.lexicon_path, "lexicon");
    c.output_dir = resolve(base_dir, j.value("output_dir", "out"));
    c.journal_path = j.contains("journal") ? resolve(base_dir, j["journal"].get<std::string>())
                                           : c.output_dir / "journal.jsonl";
    if (j.contains("vote_history")) {
      c.vote_history_path = resolve(base_dir, j["vote_history"].get<std::string>());
      require_exists(*c.vote_history_path, "vote history");
    }
    if (j.contains("gold")) {
      c.gold_path = resolve(base_dir, j["gold"].get<std::string>());
      require_exists(*c.gold_path, "gold labels");
    }

    if (j.contains("embedding")) {
      const auto& e = j["embedding"];
      c.embedding.backend = e.value("backend", "test");
      if (c.embedding.backend == "file") {
        c.embedding.store = resolve(base_dir, e.at("store").get<std::string>());
        require_exists(c.embedding.store, "embedding store");
      } else if (c.embedding.backend == "http") {
        c.embedding.url = e.at("url").get<std::string>();
      } else if (c.embedding.backend != "test") {
        throw ValidationError("embedding.backend must be file, test or http");
      }
      c.embedding.dimension = e.value("dimension", c.embedding.dimension);
      c.embedding.seed = e.value("seed", c.embedding.seed);
      c.embedding.batch_size = e.value("batch_size", c.embedding.batch_size);
      c.embedding.max_in_flight = e.value("max_in_flight", c.embedding.max_in_flight);
      if (c.embedding.dimension < 2) throw ValidationError("embedding.dimension must be at least 2");
    }

    if (j.contains("llm")) {
      const auto& l = j["llm"];
      c.llm.transport = l.value("transport", "replay");
      if (c.llm.transport == "replay") {
        c.llm.transcripts = resolve(base_dir, l.at("transcripts").get<std::string>());
        require_exists(c.llm.transcripts, "LLM transcripts");
      } else if (c.llm.transport == "http") {
        c.llm.url = l.at("url").get<std::string>();
      } else {
        throw ValidationError("llm.transport must be replay or http");
      }
      if (l.contains("prompts")) {
        for (const auto& [lang, p] : l["prompts"].items()) {
          c.llm.prompts[lang] = resolve(base_dir, p.get<std::string>());
          require_exists(c.llm.prompts[lang], "prompt template");
        }
      }
      c.llm.temperature = l.value("temperature", c.llm.temperature);
      c.llm.max_tokens = l.value("max_tokens", c.llm.max_tokens);
      c.llm.workers = std::max<size_t>(1, l.value("workers", c.llm.workers));
    }

    if (j.contains("esf")) {
      const auto& e = j["esf"];
      auto mode = esf::parse_mode(e.value("mode", "avg_radius"));
      if (!mode) throw ValidationError("esf.mode must be avg_radius, max_radius or ocsvm");
      c.esf_mode = *mode;
      auto metric = esf::parse_metric(e.value("metric", "euclidean"));
      if (!metric) throw ValidationError("esf.metric must be euclidean or cosine");
      c.esf.metric = *metric;
      c.esf.nu = e.value("nu", 0.1);
      if (!(c.esf.nu > 0.0 && c.esf.nu <= 1.0)) throw ValidationError("esf.nu must lie in (0, 1]");
      auto kernel = esf::parse_kernel(e.value("kernel", "rbf"));
      if (!kernel) throw ValidationError("esf.kernel must be linear or rbf");
      c.esf.kernel = *kernel;
      if (e.contains("gamma") && !e["gamma"].is_null()) c.esf.gamma = e["gamma"].get<double>();
    }
    c.esf.fit_svm = true;

    auto sim = metrics::parse_similarity_mode(j.value("similarity_mode", "share_renormalized"));
    if (!sim) throw ValidationError("similarity_mode must be share_renormalized or raw_sentence");
    c.similarity_mode = *sim;
    auto det = lexicon::parse_method(j.value("detection", "dictionary"));
    if (!det) throw ValidationError("detection must be dictionary or llm_esf");
    c.detection = *det;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  return c;
}

PipelineConfig load_config(const fs::path& path) {
  PipelineConfig c = parse_config(io::read_file(path), fs::absolute(path).parent_path());
  c.config_path = path;
  return c;
}

// ---------------------------------------------------------------------------
// Manifest

std::string serialize_manifest(const RunManifest& m) {
  ordered_json j;
  j["run_id"] = m.run_id;
  j["config_digest"] = m.config_digest;
  j["lexicon_version"] = m.lexicon_version;
  j["inputs"] = m.inputs;
  ordered_json stages = ordered_json::object();
  for (const auto& info : kStages) {
    auto it = m.stages.find(info.name);
    if (it == m.stages.end()) continue;
    const auto& r = it->second;
    stages[info.name] = {{"started", r.started},
                         {"finished", r.finished},
                         {"inputs", r.inputs},
                         {"outputs", r.outputs},
                         {"warnings", r.warnings}};
  }
  j["stages"] = stages;
  return j.dump(2) + "\n";
}

RunManifest parse_manifest(std::string_view json_text) {
  json j = json::parse(json_text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ValidationError("manifest is not a JSON object");
  RunManifest m;
  try {
    m.run_id = j.at("run_id").get<std::string>();
    m.config_digest = j.at("config_digest").get<std::string>();
    m.lexicon_version = j.value("lexicon_version", int64_t{0});
    m.inputs = j.value("inputs", std::map<std::string, std::string>{});
    for (const auto& [name, s] : j.at("stages").items()) {
      StageRecord r;
      r.started = s.value("started", "");
      r.finished = s.value("finished", "");
      r.inputs = s.value("inputs", std::map<std::string, std::string>{});
      r.outputs = s.value("outputs", std::map<std::string, std::string>{});
      r.warnings = s.value("warnings", std::vector<std::string>{});
      m.stages[name] = std::move(r);
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("manifest: ") + e.what());
  }
  return m;
}

fs::path manifest_path(const PipelineConfig& config) { return config.output_dir / artifact::manifest; }

// ---------------------------------------------------------------------------
// Shared helpers

lexicon::GroupLexicon current_lexicon(const PipelineConfig& config) {
  return lexicon::replay(lexicon::load_lexicon(config.lexicon_path), lexicon::load_journal(config.journal_path));
}

std::vector<embed::EmbeddingVector> whitelist_embeddings(const lexicon::GroupLexicon& lex,
                                                         const embed::EmbeddingStore& store,
                                                         const std::string& backend_id) {
  std::set<std::string> phrases;
  for (const auto& [id, entry] : lex.entries)
    for (const auto& [lang, syns] : entry.synonyms) phrases.insert(syns.begin(), syns.end());
  std::vector<embed::EmbeddingVector> out;
  for (const auto& p : phrases)
    if (const auto* v = store.find(p)) out.push_back({p, *v, backend_id});
  return out;
}

std::string profiles_to_jsonl(const std::vector<metrics::SalienceProfile>& profiles) {
  std::string out;
  for (const auto& p : profiles) {
    ordered_json j;
    j["doc_id"] = p.doc_id;
    j["total_sentences"] = p.total_sentences;
    j["denominator_sentences"] = p.denominator_sentences;
    j["counts"] = p.counts;
    j["raw_salience"] = p.raw_salience;
    j["share"] = p.share;
    j["empty"] = p.empty;
    out += j.dump() + "\n";
  }
  return out;
}

std::vector<metrics::SalienceProfile> profiles_from_jsonl(std::string_view content) {
  std::vector<metrics::SalienceProfile> out;
  for (const auto& line : io::split_lines(content)) {
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw ValidationError("malformed salience profile line");
    try {
      metrics::SalienceProfile p;
      p.doc_id = j.at("doc_id").get<std::string>();
      p.total_sentences = j.at("total_sentences").get<size_t>();
      p.denominator_sentences = j.at("denominator_sentences").get<size_t>();
      p.counts = j.at("counts").get<std::map<std::string, size_t>>();
      p.raw_salience = j.at("raw_salience").get<std::map<std::string, double>>();
      p.share = j.at("share").get<std::map<std::string, double>>();
      p.empty = j.at("empty").get<bool>();
      out.push_back(std::move(p));
    } catch (const json::exception& e) {
      throw ValidationError(std::string("bad salience profile: ") + e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Stage execution

namespace {

std::string records_to_jsonl(const std::vector<metrics::SimilarityRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    ordered_json j;
    j["election_id"] = r.election_id;
    j["centre_doc_id"] = r.centre_doc_id;
    j["rr_doc_id"] = r.rr_doc_id;
    j["dissimilarity"] = r.dissimilarity;
    j["similarity"] = r.similarity;
    j["mode"] = std::string(metrics::to_string(r.mode));
    j["clamped"] = r.clamped;
    out += j.dump() + "\n";
  }
  return out;
}

std::vector<metrics::SimilarityRecord> records_from_jsonl(std::string_view content) {
  std::vector<metrics::SimilarityRecord> out;
  for (const auto& line : io::split_lines(content)) {
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw ValidationError("malformed similarity record");
    metrics::SimilarityRecord r;
    r.election_id = j.at("election_id").get<std::string>();
    r.centre_doc_id = j.at("centre_doc_id").get<std::string>();
    r.rr_doc_id = j.at("rr_doc_id").get<std::string>();
    r.dissimilarity = j.at("dissimilarity").get<double>();
    r.similarity = j.at("similarity").get<double>();
    r.mode = metrics::parse_similarity_mode(j.at("mode").get<std::string>()).value_or(r.mode);
    r.clamped = j.value("clamped", false);
    out.push_back(std::move(r));
  }
  return out;
}

bool is_centre(corpus::PartyFamily f) {
  return f == corpus::PartyFamily::CentreLeft || f == corpus::PartyFamily::CentreRight;
}

class StageContext {
 public:
  StageContext(Stage stage, const PipelineConfig& config, const RunOptions& options, RunManifest& manifest)
      : stage_(stage), config_(config), options_(options), manifest_(manifest) {}

  const PipelineConfig& config() const { return config_; }
  const RunOptions& options() const { return options_; }

  // Fails unless `upstream` has completed and its outputs are still on disk.
  void require(Stage upstream) const {
    auto it = manifest_.stages.find(std::string(to_string(upstream)));
    bool ok = it != manifest_.stages.end();
    if (ok)
      for (const auto& [name, digest] : it->second.outputs) ok = ok && fs::exists(config_.output_dir / name);
    if (!ok) throw DependencyError("run " + std::string(to_string(upstream)) + " first");
  }

  bool completed(Stage upstream) const {
    try {
      require(upstream);
      return true;
    } catch (const DependencyError&) {
      return false;
    }
  }

  std::string read(Stage producer, const char* name) {
    require(producer);
    fs::path p = config_.output_dir / name;
    if (!fs::exists(p)) throw DependencyError("run " + std::string(to_string(producer)) + " first");
    std::string content = io::read_file(p);
    record_.inputs[name] = io::sha256_hex(content);
    return content;
  }

  void emit(const char* name, std::string content) { pending_.emplace_back(name, std::move(content)); }
  void warn(std::string w) { record_.warnings.push_back(std::move(w)); }
  void note(std::string n) { notes_.push_back(std::move(n)); }

  StageResult commit(const std::string& started) {
    fs::create_directories(config_.output_dir);
    for (const auto& [name, content] : pending_) {
      io::write_atomic(config_.output_dir / name, content);
      record_.outputs[name] = io::sha256_hex(content);
    }
    record_.started = started;
    record_.finished = io::utc_timestamp();
    manifest_.stages[std::string(to_string(stage_))] = record_;
    StageResult result;
    result.stage = stage_;
    result.outputs = record_.outputs;
    result.warnings = record_.warnings;
    result.notes = notes_;
    return result;
  }

 private:
  Stage stage_;
  const PipelineConfig& config_;
  const RunOptions& options_;
  RunManifest& manifest_;
  StageRecord record_;
  std::vector<std::pair<std::string, std::string>> pending_;
  std::vector<std::string> notes_;
};

// -- ingest ------------------------------------------------------------------

void run_ingest(StageContext& ctx) {
  corpus::Corpus c = corpus::ingest(ctx.config().corpus_path, ctx.config().corpus_format);
  for (const auto& r : c.rejections)
    ctx.warn("corpus line " + std::to_string(r.line_no) + " rejected: " + r.reason);
  std::vector<corpus::Sentence> sentences;
  for (const auto& m : c.manifestos) {
    std::vector<std::string> warnings;
    auto s = corpus::split_sentences(m, &warnings);
    for (auto& w : warnings) ctx.warn(std::move(w));
    sentences.insert(sentences.end(), s.begin(), s.end());
  }
  ctx.emit(artifact::manifestos, corpus::to_jsonl(c.manifestos));
  ctx.emit(artifact::sentences, corpus::sentences_to_jsonl(sentences));
  ctx.emit(artifact::rejections, corpus::rejections_to_jsonl(c.rejections));
}

struct Documents {
  std::vector<corpus::Manifesto> manifestos;
  std::vector<corpus::Sentence> sentences;
  std::map<std::string, std::string> language;  // doc_id -> language
};

Documents load_documents(StageContext& ctx) {
  Documents d;
  d.manifestos = corpus::ingest_jsonl(ctx.read(Stage::ingest, artifact::manifestos)).manifestos;
  d.sentences = corpus::sentences_from_jsonl(ctx.read(Stage::ingest, artifact::sentences));
  for (const auto& m : d.manifestos) d.language[m.doc_id] = m.language;
  return d;
}

std::vector<lexicon::GroupMention> match_all(const Documents& docs, const lexicon::GroupLexicon& lex,
                                             lexicon::Method method, StageContext& ctx) {
  std::map<std::string, lexicon::Matcher> matchers;
  std::set<std::string> unsupported;
  std::vector<lexicon::GroupMention> out;
  for (const auto& s : docs.sentences) {
    const std::string& lang = docs.language.at(s.doc_id);
    auto it = matchers.find(lang);
    if (it == matchers.end()) it = matchers.emplace(lang, lexicon::Matcher(lex, lang, method)).first;
    if (!it->second.supported()) {
      unsupported.insert(lang);
      continue;
    }
    auto m = it->second.match(s);
    out.insert(out.end(), m.begin(), m.end());
  }
  for (const auto& lang : unsupported) ctx.warn("lexicon has no synonyms for language " + lang);
  return out;
}

void run_label_dict(StageContext& ctx) {
  Documents docs = load_documents(ctx);
  auto lex = current_lexicon(ctx.config());
  ctx.emit(artifact::mentions_dictionary,
           lexicon::mentions_to_jsonl(match_all(docs, lex, lexicon::Method::dictionary, ctx)));
}

// -- extract-llm -------------------------------------------------------------

std::shared_ptr<llm::LlmTransport> make_transport(const PipelineConfig& config, const RunOptions& options) {
  std::shared_ptr<llm::LlmTransport> inner = options.transport;
  if (!inner) {
    if (config.llm.transport == "replay") {
      inner = std::make_shared<llm::ReplayTransport>(llm::load_transcripts(config.llm.transcripts));
    } else {
      llm::HttpTransportConfig hc;
      hc.url = config.llm.url;
      inner = std::make_shared<llm::HttpTransport>(hc);
    }
  }
  if (options.no_cache) return inner;
  fs::create_directories(config.output_dir);
  return std::make_shared<llm::CachingTransport>(inner, config.output_dir / artifact::llm_cache);
}

void run_extract_llm(StageContext& ctx) {
  Documents docs = load_documents(ctx);
  const auto& cfg = ctx.config();

  std::map<std::string, llm::PromptTemplate> templates;
  auto template_for = [&](const std::string& lang) -> const llm::PromptTemplate& {
    auto it = templates.find(lang);
    if (it != templates.end()) return it->second;
    auto path = cfg.llm.prompts.find(lang);
    auto t = path != cfg.llm.prompts.end() ? llm::PromptTemplate::load(path->second, lang)
                                           : llm::PromptTemplate::builtin(lang);
    return templates.emplace(lang, std::move(t)).first->second;
  };
  // Identical prompts are sent once, in first-occurrence order, and every
  // sentence sharing the prompt reuses that response. Keeps the outcome
  // independent of worker scheduling.
  std::vector<const corpus::Sentence*> work;
  std::vector<const llm::PromptTemplate*> work_templates;
  std::vector<size_t> work_of;  // per sentence, index into `work`
  std::vector<const corpus::Sentence*> sentences;
  std::map<std::string, size_t> by_prompt;
  for (const auto& s : docs.sentences) {
    if (text::trim(s.text).empty()) continue;
    const auto& tmpl = template_for(docs.language.at(s.doc_id));
    auto [it, fresh] = by_prompt.emplace(tmpl.render(s.text), work.size());
    if (fresh) {
      work.push_back(&s);
      work_templates.push_back(&tmpl);
    }
    sentences.push_back(&s);
    work_of.push_back(it->second);
  }

  auto transport = make_transport(cfg, ctx.options());
  llm::ExtractOptions opts;
  opts.temperature = cfg.llm.temperature;
  opts.max_tokens = cfg.llm.max_tokens;

  struct Outcome {
    std::optional<llm::ExtractionResult> result;
    std::string failure;
    std::string raw;
    std::exception_ptr fatal;
  };
  std::vector<Outcome> outcomes(work.size());
  auto worker = [&](size_t first, size_t stride) {
    for (size_t i = first; i < work.size(); i += stride) {
      try {
        outcomes[i].result = llm::extract(*work[i], *work_templates[i], *transport, opts);
      } catch (const llm::ExtractionError& e) {
        std::string what = e.what();
        size_t colon = what.find(": ");
        outcomes[i].failure = colon == std::string::npos ? what : what.substr(colon + 2);
        outcomes[i].raw = e.raw_response;
      } catch (...) {
        outcomes[i].fatal = std::current_exception();
      }
    }
  };
  size_t n_workers = std::min(cfg.llm.workers, std::max<size_t>(1, work.size()));
  std::vector<std::thread> threads;
  for (size_t w = 0; w < n_workers; ++w) threads.emplace_back(worker, w, n_workers);
  for (auto& t : threads) t.join();
  for (const auto& o : outcomes)
    if (o.fatal) std::rethrow_exception(o.fatal);

  std::vector<llm::ExtractionResult> results;
  std::string failures;
  for (size_t k = 0; k < sentences.size(); ++k) {
    const Outcome& o = outcomes[work_of[k]];
    const std::string& sid = sentences[k]->sentence_id;
    if (o.result) {
      llm::ExtractionResult r = *o.result;
      r.sentence_id = sid;
      results.push_back(std::move(r));
    } else {
      ordered_json f;
      f["sentence_id"] = sid;
      f["error"] = o.failure;
      f["raw_response"] = o.raw;
      failures += f.dump() + "\n";
      ctx.warn("extraction failed for " + sid);
    }
  }
  ctx.note(std::to_string(work.size()) + " distinct prompts for " + std::to_string(sentences.size()) +
           " sentences");
  if (auto* caching = dynamic_cast<llm::CachingTransport*>(transport.get())) {
    caching->compact();
    ctx.note("llm cache: " + std::to_string(caching->hits()) + " hits, " + std::to_string(caching->misses()) +
             " misses");
  } else {
    ctx.note("llm cache: bypassed");
  }
  ctx.emit(artifact::extractions, llm::results_to_jsonl(results));
  ctx.emit(artifact::extraction_failures, failures);
  ctx.emit(artifact::candidates, llm::candidates_to_jsonl(llm::aggregate(results)));
}

// -- embed -------------------------------------------------------------------

std::shared_ptr<embed::Backend> make_backend(const PipelineConfig& config, const RunOptions& options) {
  if (options.embed_backend) return options.embed_backend;
  const auto& e = config.embedding;
  if (e.backend == "file") return std::make_shared<embed::FileBackend>(embed::load_store(e.store));
  if (e.backend == "test") return std::make_shared<embed::TestBackend>(e.dimension, e.seed);
  embed::HttpBackendConfig hc;
  hc.url = e.url;
  hc.batch_size = e.batch_size;
  hc.max_in_flight = e.max_in_flight;
  return std::make_shared<embed::HttpBackend>(hc);
}

void run_embed(StageContext& ctx) {
  auto candidates = llm::candidates_from_jsonl(ctx.read(Stage::extract_llm, artifact::candidates));
  auto lex = current_lexicon(ctx.config());
  std::set<std::string> phrases;
  for (const auto& [id, entry] : lex.entries)
    for (const auto& [lang, syns] : entry.synonyms) phrases.insert(syns.begin(), syns.end());
  for (const auto& c : candidates) phrases.insert(c.surface_phrase);

  auto backend = make_backend(ctx.config(), ctx.options());
  auto lookups = embed::embed(std::vector<std::string>(phrases.begin(), phrases.end()), *backend);
  embed::EmbeddingStore store;
  std::vector<std::string> missing;
  for (const auto& l : lookups) {
    if (l.missing()) missing.push_back(l.phrase);
    else store.insert(l.phrase, l.embedding->vector);
  }
  if (store.size() == 0) throw embed::EmptyStoreError("no phrase received an embedding");
  if (!missing.empty()) ctx.warn(std::to_string(missing.size()) + " phrases have no embedding");
  ordered_json meta;
  meta["backend_id"] = backend->id();
  meta["dimension"] = store.dimension();
  meta["embedded"] = store.size();
  meta["missing"] = missing;
  ctx.emit(artifact::embeddings, store.to_tsv());
  ctx.emit(artifact::embeddings_meta, meta.dump(2) + "\n");
}

struct StoreWithId {
  embed::EmbeddingStore store;
  std::string backend_id;
};

StoreWithId load_embeddings(StageContext& ctx) {
  StoreWithId s;
  s.store = embed::parse_store(ctx.read(Stage::embed, artifact::embeddings));
  s.backend_id = json::parse(ctx.read(Stage::embed, artifact::embeddings_meta)).value("backend_id", "");
  return s;
}

// -- esf ---------------------------------------------------------------------

void run_esf_fit(StageContext& ctx) {
  auto emb = load_embeddings(ctx);
  auto lex = current_lexicon(ctx.config());
  auto whitelist = whitelist_embeddings(lex, emb.store, emb.backend_id);
  esf::EsfModel model = esf::fit(whitelist, ctx.config().esf);
  ctx.note("whitelist of " + std::to_string(whitelist.size()) + " phrases");
  ctx.emit(artifact::esf_model, esf::serialize_model(model));
}

void run_esf_filter(StageContext& ctx) {
  auto model = esf::parse_model(ctx.read(Stage::esf_fit, artifact::esf_model));
  auto candidates = llm::candidates_from_jsonl(ctx.read(Stage::extract_llm, artifact::candidates));
  auto emb = load_embeddings(ctx);
  std::map<std::string, size_t> order;
  for (size_t i = 0; i < candidates.size(); ++i) {
    auto& c = candidates[i];
    order[c.candidate_id] = i;
    if (const auto* v = emb.store.find(c.surface_phrase))
      c.embedding = embed::EmbeddingVector{c.surface_phrase, *v, emb.backend_id};
  }
  auto result = esf::filter_candidates(std::move(candidates), model, ctx.config().esf_mode);
  std::vector<llm::CandidateGroup> all;
  for (auto* part : {&result.accepted, &result.rejected, &result.unresolved})
    all.insert(all.end(), part->begin(), part->end());
  std::sort(all.begin(), all.end(), [&](const llm::CandidateGroup& a, const llm::CandidateGroup& b) {
    return order.at(a.candidate_id) < order.at(b.candidate_id);
  });
  if (!result.unresolved.empty())
    ctx.warn(std::to_string(result.unresolved.size()) + " candidates lack an embedding");
  ctx.note(std::to_string(result.accepted.size()) + " accepted, " + std::to_string(result.rejected.size()) +
           " rejected");
  ctx.emit(artifact::candidates_filtered, llm::candidates_to_jsonl(all));
}

bool accepted_by(const llm::CandidateGroup& c, esf::Mode mode) {
  for (const auto& v : c.verdicts)
    if (v.classifier == esf::to_string(mode)) return v.accepted;
  return false;
}

void run_expand_dict(StageContext& ctx) {
  auto candidates = llm::candidates_from_jsonl(ctx.read(Stage::esf_filter, artifact::candidates_filtered));
  Documents docs = load_documents(ctx);
  auto lex = current_lexicon(ctx.config());
  uint64_t next_id = lex.journal.empty() ? 1 : lex.journal.back().event_id + 1;
  size_t added = 0;
  for (const auto& c : candidates) {
    if (!accepted_by(c, ctx.config().esf_mode) || c.language.empty()) continue;
    if (lex.owner(c.language, c.surface_phrase)) continue;
    lexicon::ExpansionEvent ev;
    ev.event_id = next_id;
    ev.timestamp = io::utc_timestamp();
    ev.surface_phrase = c.surface_phrase;
    ev.language = c.language;
    ev.decision = lexicon::Decision::accept_as_new_group;
    ev.target_group_id = "esf_" + lexicon::slug_for(c.surface_phrase);
    ev.reviewer = "esf";
    try {
      lex = lexicon::apply_expansion(lex, ev);
      ++next_id;
      ++added;
    } catch (const ValidationError& e) {
      ctx.warn("skipped candidate \"" + c.surface_phrase + "\": " + e.what());
    }
  }
  ctx.note(std::to_string(added) + " groups added");
  ctx.emit(artifact::lexicon_expanded, lexicon::serialize_lexicon(lex));
  ctx.emit(artifact::mentions_llm_esf,
           lexicon::mentions_to_jsonl(match_all(docs, lex, lexicon::Method::llm_esf, ctx)));
}

// -- salience, similarity, keyness ----------------------------------------------

std::vector<lexicon::GroupMention> detection_mentions(StageContext& ctx, lexicon::Method method) {
  if (method == lexicon::Method::dictionary)
    return lexicon::mentions_from_jsonl(ctx.read(Stage::label_dict, artifact::mentions_dictionary));
  return lexicon::mentions_from_jsonl(ctx.read(Stage::expand_dict, artifact::mentions_llm_esf));
}

void run_salience(StageContext& ctx) {
  auto mentions = detection_mentions(ctx, ctx.config().detection);
  Documents docs = load_documents(ctx);
  std::map<std::string, std::vector<corpus::Sentence>> by_doc;
  std::map<std::string, std::string> doc_of;
  for (const auto& s : docs.sentences) {
    by_doc[s.doc_id].push_back(s);
    doc_of[s.sentence_id] = s.doc_id;
  }
  std::map<std::string, std::vector<lexicon::GroupMention>> mentions_by_doc;
  for (const auto& m : mentions) {
    auto it = doc_of.find(m.sentence_id);
    if (it == doc_of.end()) throw ValidationError("mention of unknown sentence " + m.sentence_id);
    mentions_by_doc[it->second].push_back(m);
  }
  std::vector<metrics::SalienceProfile> profiles;
  for (const auto& m : docs.manifestos) {
    auto p = metrics::salience(mentions_by_doc[m.doc_id], by_doc[m.doc_id]);
    p.doc_id = m.doc_id;
    if (p.empty) ctx.warn("manifesto " + m.doc_id + " mentions no group");
    profiles.push_back(std::move(p));
  }
  ctx.emit(artifact::profiles, profiles_to_jsonl(profiles));
  ctx.emit(artifact::salience, metrics::salience_csv(profiles));
}

std::map<std::string, metrics::SalienceProfile> load_profiles(StageContext& ctx) {
  std::map<std::string, metrics::SalienceProfile> out;
  for (auto& p : profiles_from_jsonl(ctx.read(Stage::salience, artifact::profiles))) out[p.doc_id] = std::move(p);
  return out;
}

void run_similarity(StageContext& ctx) {
  auto profiles = load_profiles(ctx);
  Documents docs = load_documents(ctx);
  std::map<std::string, std::vector<const corpus::Manifesto*>> by_election;
  for (const auto& m : docs.manifestos) by_election[m.election_id()].push_back(&m);

  std::vector<metrics::SimilarityRow> rows;
  std::vector<metrics::SimilarityRecord> records;
  for (auto& [election, ms] : by_election) {
    std::sort(ms.begin(), ms.end(), [](const auto* a, const auto* b) { return a->party_id < b->party_id; });
    for (const auto* centre : ms) {
      if (!is_centre(centre->party_family)) continue;
      for (const auto* rr : ms) {
        if (rr->party_family != corpus::PartyFamily::RadicalRight) continue;
        try {
          auto rec = metrics::similarity(profiles.at(centre->doc_id), profiles.at(rr->doc_id),
                                         ctx.config().similarity_mode);
          rec.election_id = election;
          if (rec.clamped) ctx.warn("similarity of " + centre->doc_id + " and " + rr->doc_id + " clamped");
          rows.push_back({rec, centre->party_id, rr->party_id, std::string(corpus::to_string(centre->party_family))});
          records.push_back(std::move(rec));
        } catch (const metrics::UndefinedSimilarityError& e) {
          ctx.warn(e.what());
        }
      }
    }
  }
  ctx.emit(artifact::similarity, metrics::similarity_csv(rows));
  ctx.emit(artifact::similarity_records, records_to_jsonl(records));
}

void run_keyness(StageContext& ctx) {
  auto profiles = load_profiles(ctx);
  Documents docs = load_documents(ctx);
  std::map<std::string, double> target, reference;
  for (const auto& m : docs.manifestos) {
    bool rr = m.party_family == corpus::PartyFamily::RadicalRight;
    if (!rr && !is_centre(m.party_family)) continue;
    auto& side = rr ? target : reference;
    for (const auto& [g, n] : profiles.at(m.doc_id).counts) side[g] += static_cast<double>(n);
  }
  ctx.emit(artifact::keyness, metrics::keyness_csv(metrics::keyness(target, reference)));
}

// -- panel, regress, eval ------------------------------------------------------

void run_panel(StageContext& ctx) {
  auto records = records_from_jsonl(ctx.read(Stage::similarity, artifact::similarity_records));
  Documents docs = load_documents(ctx);
  std::vector<econ::VoteRecord> votes =
      ctx.config().vote_history_path
          ? econ::parse_vote_history_csv(io::read_file(*ctx.config().vote_history_path))
          : econ::vote_history_from_corpus(docs.manifestos);
  auto panel = econ::build_panel(records, docs.manifestos, votes);
  ctx.emit(artifact::panel, econ::panel_csv(panel));
}

void run_regress(StageContext& ctx) {
  auto panel = econ::parse_panel_csv(ctx.read(Stage::panel, artifact::panel));
  std::vector<econ::OlsFit> fits;
  for (const auto& spec : econ::default_specs()) fits.push_back(econ::fit_ols_fe(panel, spec));
  ctx.emit(artifact::regression_text, econ::report_text(fits));
  ctx.emit(artifact::regression_csv, econ::report_csv(fits));
}

void run_eval(StageContext& ctx) {
  if (!ctx.config().gold_path) throw ValidationError("eval needs a gold file in the configuration");
  auto gold = eval::load_gold(*ctx.config().gold_path);
  Documents docs = load_documents(ctx);

  std::vector<std::pair<std::string, std::vector<lexicon::GroupMention>>> methods;
  methods.emplace_back("dictionary", detection_mentions(ctx, lexicon::Method::dictionary));
  if (ctx.completed(Stage::expand_dict))
    methods.emplace_back("llm_esf", detection_mentions(ctx, lexicon::Method::llm_esf));

  ordered_json report = ordered_json::object();
  std::string text;
  for (const auto& [name, mentions] : methods) {
    std::map<std::string, std::set<std::string>> predictions;
    for (const auto& s : docs.sentences) predictions[s.sentence_id];
    for (const auto& m : mentions) predictions[m.sentence_id].insert(m.group_id);
    for (auto g : {eval::Granularity::binary, eval::Granularity::per_group}) {
      auto r = eval::score_detection(predictions, gold, g);
      report[name][std::string(eval::to_string(g))] = ordered_json::parse(eval::report_json(r));
      text += "[" + name + "] " + eval::report_text(r) + "\n";
    }
  }
  ctx.emit(artifact::eval_json, report.dump(2) + "\n");
  ctx.emit(artifact::eval_text, text);
}

std::map<std::string, std::string> input_digests(const PipelineConfig& c) {
  std::map<std::string, std::string> out;
  auto add = [&](const std::string& key, const fs::path& p) {
    if (fs::exists(p)) out[key] = io::file_sha256(p);
  };
  add("corpus", c.corpus_path);
  add("lexicon", c.lexicon_path);
  add("journal", c.journal_path);
  if (c.vote_history_path) add("vote_history", *c.vote_history_path);
  if (c.gold_path) add("gold", *c.gold_path);
  if (c.llm.transport == "replay") add("transcripts", c.llm.transcripts);
  if (c.embedding.backend == "file") add("embedding_store", c.embedding.store);
  for (const auto& [lang, p] : c.llm.prompts) add("prompt_" + lang, p);
  return out;
}

}  // namespace

StageResult run_stage(Stage stage, const PipelineConfig& config, const RunOptions& options) {
  const std::string started = io::utc_timestamp();
  RunManifest manifest;
  fs::path mpath = manifest_path(config);
  if (fs::exists(mpath)) {
    manifest = parse_manifest(io::read_file(mpath));
    if (manifest.config_digest != config.digest) {
      if (!options.force)
        throw ConfigMismatchError("output directory " + config.output_dir.string() +
                                  " holds a run with a different configuration; rerun with --force");
      manifest.stages.clear();
    }
  }
  manifest.config_digest = config.digest;
  manifest.run_id = "run-" + config.digest.substr(0, 12);

  StageContext ctx(stage, config, options, manifest);
  switch (stage) {
    case Stage::ingest: run_ingest(ctx); break;
    case Stage::label_dict: run_label_dict(ctx); break;
    case Stage::extract_llm: run_extract_llm(ctx); break;
    case Stage::embed: run_embed(ctx); break;
    case Stage::esf_fit: run_esf_fit(ctx); break;
    case Stage::esf_filter: run_esf_filter(ctx); break;
    case Stage::expand_dict: run_expand_dict(ctx); break;
    case Stage::salience: run_salience(ctx); break;
    case Stage::similarity: run_similarity(ctx); break;
    case Stage::keyness: run_keyness(ctx); break;
    case Stage::panel: run_panel(ctx); break;
    case Stage::regress: run_regress(ctx); break;
    case Stage::eval: run_eval(ctx); break;
  }
  StageResult result = ctx.commit(started);
  manifest.lexicon_version = current_lexicon(config).version;
  manifest.inputs = input_digests(config);
  io::write_atomic(mpath, serialize_manifest(manifest));
  return result;
}

std::vector<StageResult> run_all(const PipelineConfig& config, const RunOptions& options) {
  std::vector<StageResult> out;
  for (Stage s : all_stages()) {
    if (s == Stage::eval && !config.gold_path) continue;
    out.push_back(run_stage(s, config, options));
  }
  return out;
}

}  // namespace groupscope::pipeline
