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

#include "groupscope/review.hpp"

#include <httplib.h>

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <limits>
#include <mutex>

#include "groupscope/io.hpp"
#include "groupscope/text.hpp"

namespace groupscope::review {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr const char* kReviewModel = "review_model.json";
constexpr size_t kSampleSentences = 3;

llm::ReviewStatus status_for(lexicon::Decision d) {
  return d == lexicon::Decision::reject ? llm::ReviewStatus::rejected : llm::ReviewStatus::accepted;
}

}  // namespace

ReviewService::ReviewService(const pipeline::PipelineConfig& config, JournalAppend append)
    : config_(config), append_(std::move(append)) {
  if (!append_) append_ = [](const fs::path& p, std::string_view line) { io::append_line_durable(p, line); };
  const fs::path& out = config_.output_dir;
  auto need = [&](const char* name, const char* stage) {
    if (!fs::exists(out / name)) throw DependencyError(std::string("run ") + stage + " first");
    return io::read_file(out / name);
  };
  std::string filtered = need(pipeline::artifact::candidates_filtered, "esf-filter");
  store_ = embed::parse_store(need(pipeline::artifact::embeddings, "embed"));
  backend_id_ = json::parse(need(pipeline::artifact::embeddings_meta, "embed")).value("backend_id", "");
  model_ = esf::parse_model(fs::exists(out / kReviewModel) ? io::read_file(out / kReviewModel)
                                                            : need(pipeline::artifact::esf_model, "esf-fit"));
  for (const auto& s : corpus::sentences_from_jsonl(need(pipeline::artifact::sentences, "ingest")))
    sentence_text_[s.sentence_id] = s.text;

  seed_ = lexicon::load_lexicon(config_.lexicon_path);
  lex_ = lexicon::replay(seed_, lexicon::load_journal(config_.journal_path));

  const std::string mode(esf::to_string(config_.esf_mode));
  for (auto& c : llm::candidates_from_jsonl(filtered)) {
    bool accepted = std::any_of(c.verdicts.begin(), c.verdicts.end(),
                                [&](const llm::ClassifierVerdict& v) { return v.classifier == mode && v.accepted; });
    if (!accepted || c.language.empty() || seed_.owner(c.language, c.surface_phrase)) continue;
    Candidate cand;
    if (const auto* v = store_.find(c.surface_phrase)) cand.vector = *v;
    cand.group = std::move(c);
    by_id_[cand.group.candidate_id] = candidates_.size();
    candidates_.push_back(std::move(cand));
  }
}

llm::ReviewStatus ReviewService::status_of(const Candidate& c) const {
  for (auto it = lex_.journal.rbegin(); it != lex_.journal.rend(); ++it) {
    if (it->language == c.group.language && text::normalize(it->surface_phrase) == c.group.surface_phrase)
      return status_for(it->decision);
  }
  return llm::ReviewStatus::pending;
}

double ReviewService::distance_of(const Candidate& c) const {
  if (c.vector.empty() || c.vector.size() != model_.center.size()) return std::numeric_limits<double>::infinity();
  return model_.distance_to_center(c.vector);
}

std::vector<const ReviewService::Candidate*> ReviewService::ranked(llm::ReviewStatus status,
                                                                   const std::string& sort) const {
  struct Keyed {
    double key;
    const Candidate* c;
  };
  std::vector<Keyed> keyed;
  for (const auto& c : candidates_) {
    if (status_of(c) != status) continue;
    double key = sort == "count" ? -static_cast<double>(c.group.occurrence_count) : distance_of(c);
    keyed.push_back({key, &c});
  }
  std::sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) {
    if (a.key != b.key) return a.key < b.key;
    return a.c->group.candidate_id < b.c->group.candidate_id;
  });
  std::vector<const Candidate*> out;
  for (const auto& k : keyed) out.push_back(k.c);
  return out;
}

std::string ReviewService::candidate_json(const Candidate& c) const {
  ordered_json j;
  j["candidate_id"] = c.group.candidate_id;
  j["surface_phrase"] = c.group.surface_phrase;
  j["source"] = std::string(llm::to_string(c.group.source));
  j["language"] = c.group.language;
  j["occurrence_count"] = c.group.occurrence_count;
  std::vector<std::string> samples;
  for (const auto& id : c.group.sentence_ids) {
    if (samples.size() == kSampleSentences) break;
    auto it = sentence_text_.find(id);
    if (it != sentence_text_.end()) samples.push_back(it->second);
  }
  j["sample_sentences"] = samples;
  double d = distance_of(c);
  j["distance"] = std::isfinite(d) ? ordered_json(d) : ordered_json(nullptr);
  j["review_status"] = std::string(llm::to_string(status_of(c)));
  return j.dump();
}

ApiResponse ReviewService::error(int status, const std::string& message) const {
  ordered_json j;
  j["error"] = message;
  j["lexicon_version"] = lex_.version;
  return {status, j.dump()};
}

ApiResponse ReviewService::list_candidates(const std::string& status, const std::string& sort,
                                           std::optional<size_t> limit) const {
  std::shared_lock lock(mu_);
  auto st = llm::parse_review_status(status.empty() ? "pending" : status);
  if (!st) return error(400, "unknown status \"" + status + "\"");
  if (!sort.empty() && sort != "distance" && sort != "count") return error(400, "unknown sort \"" + sort + "\"");
  auto list = ranked(*st, sort.empty() ? "distance" : sort);
  ordered_json j;
  j["lexicon_version"] = lex_.version;
  j["model_digest"] = model_.digest();
  j["total"] = list.size();
  ordered_json items = ordered_json::array();
  for (size_t i = 0; i < list.size() && (!limit || i < *limit); ++i)
    items.push_back(ordered_json::parse(candidate_json(*list[i])));
  j["candidates"] = items;
  return {200, j.dump()};
}

ApiResponse ReviewService::decide(const std::string& candidate_id, std::string_view body) {
  std::unique_lock lock(mu_);
  auto it = by_id_.find(candidate_id);
  if (it == by_id_.end()) return error(404, "unknown candidate " + candidate_id);
  const Candidate& cand = candidates_[it->second];

  json req = json::parse(body, nullptr, false);
  if (req.is_discarded() || !req.is_object()) return error(400, "request body is not a JSON object");
  if (!req.contains("decision") || !req["decision"].is_string()) return error(400, "missing decision");
  auto decision = lexicon::parse_decision(req["decision"].get<std::string>());
  if (!decision) return error(400, "unknown decision \"" + req["decision"].get<std::string>() + "\"");
  if (!req.contains("reviewer") || !req["reviewer"].is_string() || req["reviewer"].get<std::string>().empty())
    return error(400, "missing reviewer");
  std::string target;
  if (req.contains("target_group_id") && req["target_group_id"].is_string())
    target = req["target_group_id"].get<std::string>();
  if (*decision == lexicon::Decision::accept_as_synonym && target.empty())
    return error(400, "accept_as_synonym needs target_group_id");
  if (req.contains("expected_version") && req["expected_version"].is_number_integer() &&
      req["expected_version"].get<int64_t>() != lex_.version)
    return error(409, "lexicon version is " + std::to_string(lex_.version));
  if (status_of(cand) != llm::ReviewStatus::pending)
    return error(409, "candidate " + candidate_id + " is already " + std::string(llm::to_string(status_of(cand))));

  lexicon::ExpansionEvent ev;
  ev.event_id = lex_.journal.empty() ? 1 : lex_.journal.back().event_id + 1;
  ev.timestamp = io::utc_timestamp();
  ev.surface_phrase = cand.group.surface_phrase;
  ev.language = cand.group.language;
  ev.decision = *decision;
  ev.target_group_id = target;
  ev.reviewer = req["reviewer"].get<std::string>();

  lexicon::GroupLexicon next;
  try {
    next = lexicon::apply_expansion(lex_, ev);
  } catch (const lexicon::CollisionError& e) {
    return error(409, e.what());
  } catch (const ValidationError& e) {
    return error(400, e.what());
  }
  try {
    append_(config_.journal_path, lexicon::serialize_event(ev));
  } catch (const std::exception& e) {
    return error(500, std::string("journal write failed; decision not recorded: ") + e.what());
  }
  lex_ = std::move(next);

  ordered_json j;
  j["lexicon_version"] = lex_.version;
  j["event_id"] = ev.event_id;
  j["candidate"] = ordered_json::parse(candidate_json(cand));
  return {200, j.dump()};
}

ApiResponse ReviewService::recompute() {
  std::unique_lock lock(mu_);
  std::string previous = model_.digest();
  esf::EsfModel model;
  try {
    model = esf::fit(pipeline::whitelist_embeddings(lex_, store_, backend_id_), config_.esf);
  } catch (const Error& e) {
    return error(500, std::string("refit failed: ") + e.what());
  }
  io::write_atomic(config_.output_dir / kReviewModel, esf::serialize_model(model));
  model_ = std::move(model);

  ordered_json j;
  j["lexicon_version"] = lex_.version;
  j["model_digest"] = model_.digest();
  j["previous_model_digest"] = previous;
  j["whitelist_size"] = model_.n_whitelist;
  std::vector<std::string> order;
  for (const auto* c : ranked(llm::ReviewStatus::pending, "distance")) order.push_back(c->group.candidate_id);
  j["pending"] = order.size();
  j["pending_order"] = order;
  return {200, j.dump()};
}

ApiResponse ReviewService::lexicon() const {
  std::shared_lock lock(mu_);
  ordered_json j;
  j["lexicon_version"] = lex_.version;
  j["lexicon"] = ordered_json::parse(lexicon::serialize_lexicon(lex_));
  return {200, j.dump()};
}

ApiResponse ReviewService::stats() const {
  std::shared_lock lock(mu_);
  std::map<std::string, size_t> counts = {{"pending", 0}, {"accepted", 0}, {"rejected", 0}};
  for (const auto& c : candidates_) ++counts[std::string(llm::to_string(status_of(c)))];
  ordered_json j;
  j["lexicon_version"] = lex_.version;
  j["model_digest"] = model_.digest();
  j["counts"] = counts;
  j["journal_events"] = lex_.journal.size();
  j["groups"] = lex_.entries.size();
  return {200, j.dump()};
}

lexicon::GroupLexicon ReviewService::current_lexicon() const {
  std::shared_lock lock(mu_);
  return lex_;
}

std::string ReviewService::model_digest() const {
  std::shared_lock lock(mu_);
  return model_.digest();
}

std::vector<std::string> ReviewService::pending_order() const {
  std::shared_lock lock(mu_);
  std::vector<std::string> out;
  for (const auto* c : ranked(llm::ReviewStatus::pending, "distance")) out.push_back(c->group.candidate_id);
  return out;
}

// ---------------------------------------------------------------------------
// HTTP

struct ReviewServer::Impl {
  ReviewService& service;
  httplib::Server server;
};

namespace {

void reply(httplib::Response& res, const ApiResponse& r) {
  res.status = r.status;
  res.set_content(r.body, "application/json");
}

}  // namespace

ReviewServer::ReviewServer(ReviewService& service) : impl_(new Impl{service, {}}) {
  auto& srv = impl_->server;
  auto& svc = impl_->service;
  srv.Get("/api/candidates", [&svc](const httplib::Request& req, httplib::Response& res) {
    std::optional<size_t> limit;
    if (req.has_param("limit")) {
      const std::string v = req.get_param_value("limit");
      char* end = nullptr;
      unsigned long long n = std::strtoull(v.c_str(), &end, 10);
      if (v.empty() || *end != '\0') {
        reply(res, {400, R"({"error":"limit must be a non-negative integer"})"});
        return;
      }
      limit = static_cast<size_t>(n);
    }
    reply(res, svc.list_candidates(req.get_param_value("status"), req.get_param_value("sort"), limit));
  });
  srv.Post(R"(/api/candidates/([^/]+)/decision)", [&svc](const httplib::Request& req, httplib::Response& res) {
    reply(res, svc.decide(req.matches[1], req.body));
  });
  srv.Post("/api/recompute",
           [&svc](const httplib::Request&, httplib::Response& res) { reply(res, svc.recompute()); });
  srv.Get("/api/lexicon", [&svc](const httplib::Request&, httplib::Response& res) { reply(res, svc.lexicon()); });
  srv.Get("/api/stats", [&svc](const httplib::Request&, httplib::Response& res) { reply(res, svc.stats()); });
}

ReviewServer::~ReviewServer() { stop(); }

int ReviewServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool ReviewServer::listen() { return impl_->server.listen_after_bind(); }

void ReviewServer::stop() {
  if (impl_) impl_->server.stop();
}

void ReviewServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace groupscope::review
