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

#include "groupscope/embed.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <future>
#include <numbers>
#include <thread>

#include "groupscope/io.hpp"
#include "groupscope/text.hpp"
#include "httplib.h"
#include "json.hpp"

namespace groupscope::embed {

using nlohmann::json;

const std::vector<double>* EmbeddingStore::find(const std::string& normalized) const {
  auto it = vectors_.find(normalized);
  return it == vectors_.end() ? nullptr : &it->second;
}

void EmbeddingStore::insert(const std::string& phrase, std::vector<double> vec) {
  if (dimension_ == 0) dimension_ = vec.size();
  if (vec.size() != dimension_) {
    throw StoreCorruptionError("vector for \"" + phrase + "\" has " + std::to_string(vec.size()) +
                               " components, store dimension is " + std::to_string(dimension_));
  }
  vectors_[phrase] = std::move(vec);
}

std::string EmbeddingStore::to_tsv() const {
  std::string out;
  for (const auto& [phrase, vec] : vectors_) {
    out += phrase;
    for (double v : vec) {
      out.push_back('\t');
      out += io::format_double(v);
    }
    out.push_back('\n');
  }
  return out;
}

EmbeddingStore parse_store(std::string_view tsv) {
  EmbeddingStore store;
  auto lines = io::split_lines(tsv);
  size_t expected = 0;
  for (size_t i = 0; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    if (line.empty()) continue;
    std::string where = "line " + std::to_string(i + 1);
    std::vector<std::string_view> cols;
    size_t pos = 0;
    while (true) {
      size_t tab = line.find('\t', pos);
      cols.emplace_back(std::string_view(line).substr(pos, tab == std::string::npos ? std::string::npos : tab - pos));
      if (tab == std::string::npos) break;
      pos = tab + 1;
    }
    std::string phrase = text::normalize(cols[0]);
    if (phrase.empty()) throw ValidationError(where + ": empty phrase");
    std::vector<double> vec;
    for (size_t c = 1; c < cols.size(); ++c) {
      double v = 0;
      auto sv = cols[c];
      auto res = std::from_chars(sv.data(), sv.data() + sv.size(), v);
      if (res.ec != std::errc() || res.ptr != sv.data() + sv.size() || !std::isfinite(v))
        throw ValidationError(where + ": non-numeric component \"" + std::string(sv) + "\"");
      vec.push_back(v);
    }
    if (expected == 0) {
      if (vec.size() < 2) throw ValidationError(where + ": dimension must be at least 2");
      expected = vec.size();
    } else if (vec.size() != expected) {
      throw ValidationError(where + ": expected " + std::to_string(expected) + " components, found " +
                            std::to_string(vec.size()));
    }
    if (store.find(phrase)) throw ValidationError(where + ": duplicate phrase \"" + phrase + "\"");
    store.insert(phrase, std::move(vec));
  }
  if (store.size() == 0) throw EmptyStoreError("embedding store is empty");
  return store;
}

EmbeddingStore load_store(const std::filesystem::path& path) {
  try {
    return parse_store(io::read_file(path));
  } catch (const EmptyStoreError& e) {
    throw EmptyStoreError(path.string() + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

FileBackend::FileBackend(EmbeddingStore store, std::string id)
    : store_(std::move(store)), id_(std::move(id)) {}

std::vector<EmbeddingLookup> FileBackend::embed(std::span<const std::string> phrases) {
  std::vector<EmbeddingLookup> out;
  out.reserve(phrases.size());
  for (const auto& p : phrases) {
    EmbeddingLookup lookup{p, std::nullopt};
    if (const auto* vec = store_.find(p)) lookup.embedding = EmbeddingVector{p, *vec, id_};
    out.push_back(std::move(lookup));
  }
  return out;
}

namespace {

uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

uint64_t fnv1a(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

TestBackend::TestBackend(size_t dimension, uint64_t seed) : dimension_(dimension), seed_(seed) {
  if (dimension < 2) throw ValidationError("test backend dimension must be at least 2");
}

std::string TestBackend::id() const {
  return "test:d" + std::to_string(dimension_) + ":seed" + std::to_string(seed_);
}

std::vector<double> TestBackend::vector_for(const std::string& normalized) const {
  uint64_t state = fnv1a(normalized) ^ (seed_ * 0xD1B54A32D192ED03ULL);
  std::vector<double> v(dimension_);
  for (size_t i = 0; i < dimension_; i += 2) {
    // Box-Muller on two uniforms in (0, 1].
    double u1 = (static_cast<double>(splitmix64(state) >> 11) + 1.0) * 0x1.0p-53;
    double u2 = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
    double r = std::sqrt(-2.0 * std::log(u1));
    v[i] = r * std::cos(2.0 * std::numbers::pi * u2);
    if (i + 1 < dimension_) v[i + 1] = r * std::sin(2.0 * std::numbers::pi * u2);
  }
  double norm = 0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

std::vector<EmbeddingLookup> TestBackend::embed(std::span<const std::string> phrases) {
  std::vector<EmbeddingLookup> out;
  out.reserve(phrases.size());
  std::string backend = id();
  for (const auto& p : phrases) out.push_back({p, EmbeddingVector{p, vector_for(p), backend}});
  return out;
}

void RetryPolicy::wait_before(int attempt) const {
  if (attempt <= 1) return;
  auto delay = base_delay * (1 << (attempt - 2));
  if (sleep) sleep(delay);
  else std::this_thread::sleep_for(delay);
}

HttpPost make_http_post(const std::string& url, const std::string& token, int timeout_seconds) {
  // Split "scheme://host[:port]/path" into the client base and the path.
  size_t scheme = url.find("://");
  size_t path_at = url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  std::string base = path_at == std::string::npos ? url : url.substr(0, path_at);
  std::string path = path_at == std::string::npos ? "/" : url.substr(path_at);
  return [base, path, token, timeout_seconds](const std::string& body) -> HttpReply {
    httplib::Client client(base);
    client.set_connection_timeout(timeout_seconds);
    client.set_read_timeout(timeout_seconds);
    httplib::Headers headers;
    if (!token.empty()) headers.emplace("Authorization", "Bearer " + token);
    auto res = client.Post(path, headers, body, "application/json");
    if (!res) return {0, httplib::to_string(res.error())};
    return {res->status, res->body};
  };
}

HttpBackend::HttpBackend(HttpBackendConfig config, HttpPost post)
    : config_(std::move(config)), post_(std::move(post)) {
  if (config_.batch_size == 0) throw ValidationError("batch_size must be positive");
  if (config_.max_in_flight == 0) config_.max_in_flight = 1;
  if (config_.token.empty()) {
    if (const char* t = std::getenv("GROUPSCOPE_EMBED_TOKEN")) config_.token = t;
  }
  if (!post_) post_ = make_http_post(config_.url, config_.token, config_.timeout_seconds);
}

std::vector<std::vector<double>> HttpBackend::send_batch(const std::vector<std::string>& batch) const {
  json body = {{"inputs", batch}};
  std::string payload = body.dump(-1, ' ', false, json::error_handler_t::replace);
  std::string last_error;
  for (int attempt = 1; attempt <= config_.retry.max_attempts; ++attempt) {
    config_.retry.wait_before(attempt);
    HttpReply reply = post_(payload);
    bool transient = reply.status == 0 || reply.status == 429 || reply.status >= 500;
    if (transient) {
      last_error = reply.status == 0 ? "connection failure: " + reply.body
                                     : "HTTP " + std::to_string(reply.status);
      continue;
    }
    if (reply.status < 200 || reply.status >= 300)
      throw TransportError("embedding service returned HTTP " + std::to_string(reply.status), batch);
    json j = json::parse(reply.body, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("vectors") || !j["vectors"].is_array())
      throw TransportError("embedding service response lacks a vectors array", batch);
    const auto& vectors = j["vectors"];
    if (vectors.size() != batch.size())
      throw TransportError("embedding service returned " + std::to_string(vectors.size()) +
                               " vectors for " + std::to_string(batch.size()) + " inputs",
                           batch);
    std::vector<std::vector<double>> out;
    for (const auto& v : vectors) {
      std::vector<double> vec;
      for (const auto& x : v) {
        if (!x.is_number() || !std::isfinite(x.get<double>()))
          throw TransportError("non-numeric vector component in response", batch);
        vec.push_back(x.get<double>());
      }
      out.push_back(std::move(vec));
    }
    return out;
  }
  throw TransportError("embedding request failed after " +
                           std::to_string(config_.retry.max_attempts) + " attempts: " + last_error,
                       batch);
}

std::vector<EmbeddingLookup> HttpBackend::embed(std::span<const std::string> phrases) {
  std::vector<std::vector<std::string>> batches;
  for (size_t i = 0; i < phrases.size(); i += config_.batch_size) {
    size_t end = std::min(phrases.size(), i + config_.batch_size);
    batches.emplace_back(phrases.begin() + i, phrases.begin() + end);
  }
  std::vector<std::vector<std::vector<double>>> results(batches.size());
  for (size_t wave = 0; wave < batches.size(); wave += config_.max_in_flight) {
    size_t end = std::min(batches.size(), wave + config_.max_in_flight);
    std::vector<std::future<std::vector<std::vector<double>>>> futures;
    for (size_t b = wave; b < end; ++b)
      futures.push_back(std::async(std::launch::async, [this, &batches, b] { return send_batch(batches[b]); }));
    for (size_t b = wave; b < end; ++b) results[b] = futures[b - wave].get();
  }

  std::vector<EmbeddingLookup> out;
  out.reserve(phrases.size());
  size_t dimension = 0;
  for (size_t b = 0; b < batches.size(); ++b) {
    for (size_t k = 0; k < batches[b].size(); ++k) {
      auto& vec = results[b][k];
      if (dimension == 0) dimension = vec.size();
      if (vec.size() != dimension || vec.size() < 2)
        throw StoreCorruptionError("embedding service returned inconsistent dimensions (" +
                                   std::to_string(dimension) + " vs " + std::to_string(vec.size()) + ")");
      out.push_back({batches[b][k], EmbeddingVector{batches[b][k], std::move(vec), config_.backend_id}});
    }
  }
  return out;
}

std::vector<EmbeddingLookup> embed(const std::vector<std::string>& phrases, Backend& backend) {
  std::vector<std::string> normalized;
  normalized.reserve(phrases.size());
  for (const auto& p : phrases) {
    std::string n = text::normalize(p);
    if (n.empty()) throw ValidationError("cannot embed an empty phrase");
    normalized.push_back(std::move(n));
  }
  return backend.embed(normalized);
}

}  // namespace groupscope::embed
