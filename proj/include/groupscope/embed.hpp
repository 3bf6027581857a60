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

#ifndef GROUPSCOPE_EMBED_HPP_
#define GROUPSCOPE_EMBED_HPP_

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "groupscope/error.hpp"

namespace groupscope::embed {

struct EmbeddingVector {
  std::string phrase;  // normalized
  std::vector<double> vector;
  std::string backend_id;
};

// Result of looking up one phrase; `embedding` is empty for a MissingEmbedding.
struct EmbeddingLookup {
  std::string phrase;
  std::optional<EmbeddingVector> embedding;

  bool missing() const { return !embedding.has_value(); }
};

class EmptyStoreError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class StoreCorruptionError : public Error {
 public:
  using Error::Error;
};

class TransportError : public Error {
 public:
  TransportError(const std::string& what, std::vector<std::string> batch = {})
      : Error(what), failed_batch(std::move(batch)) {}
  std::vector<std::string> failed_batch;
};

// Failure worth retrying (connection reset, 5xx, 429).
class TransientError : public TransportError {
 public:
  using TransportError::TransportError;
};

class EmbeddingStore {
 public:
  explicit EmbeddingStore(size_t dimension = 0) : dimension_(dimension) {}

  size_t dimension() const { return dimension_; }
  size_t size() const { return vectors_.size(); }
  const std::vector<double>* find(const std::string& normalized) const;
  // Throws StoreCorruptionError on a dimension mismatch.
  void insert(const std::string& phrase, std::vector<double> vec);
  const std::map<std::string, std::vector<double>>& entries() const { return vectors_; }

  std::string to_tsv() const;

 private:
  size_t dimension_;
  std::map<std::string, std::vector<double>> vectors_;
};

EmbeddingStore parse_store(std::string_view tsv);
EmbeddingStore load_store(const std::filesystem::path& path);

class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string id() const = 0;
  // Order-preserving; one lookup per input phrase.
  virtual std::vector<EmbeddingLookup> embed(std::span<const std::string> phrases) = 0;
};

class FileBackend : public Backend {
 public:
  explicit FileBackend(EmbeddingStore store, std::string id = "file");
  std::string id() const override { return id_; }
  std::vector<EmbeddingLookup> embed(std::span<const std::string> phrases) override;
  const EmbeddingStore& store() const { return store_; }

 private:
  EmbeddingStore store_;
  std::string id_;
};

// Unit vectors drawn from a seeded hash of the normalized phrase.
class TestBackend : public Backend {
 public:
  TestBackend(size_t dimension, uint64_t seed = 0);
  std::string id() const override;
  std::vector<EmbeddingLookup> embed(std::span<const std::string> phrases) override;
  std::vector<double> vector_for(const std::string& normalized) const;

 private:
  size_t dimension_;
  uint64_t seed_;
};

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds base_delay{200};
  // Injected so tests can observe backoff without sleeping.
  std::function<void(std::chrono::milliseconds)> sleep;

  void wait_before(int attempt) const;  // attempt is 1-based; sleeps base * 2^(attempt-2)
};

struct HttpReply {
  int status = 0;  // 0 = connection failure
  std::string body;
};

// Sends one POST body, returns the reply.
using HttpPost = std::function<HttpReply(const std::string& body)>;

struct HttpBackendConfig {
  std::string url;  // http://host:port/path
  size_t batch_size = 32;
  size_t max_in_flight = 4;
  std::string backend_id = "http";
  std::string token;  // defaults to GROUPSCOPE_EMBED_TOKEN
  RetryPolicy retry;
  int timeout_seconds = 30;
};

HttpPost make_http_post(const std::string& url, const std::string& token, int timeout_seconds);

class HttpBackend : public Backend {
 public:
  explicit HttpBackend(HttpBackendConfig config, HttpPost post = {});
  std::string id() const override { return config_.backend_id; }
  std::vector<EmbeddingLookup> embed(std::span<const std::string> phrases) override;

 private:
  std::vector<std::vector<double>> send_batch(const std::vector<std::string>& batch) const;

  HttpBackendConfig config_;
  HttpPost post_;
};

// Normalizes phrases, rejects empty ones, and forwards to the backend.
std::vector<EmbeddingLookup> embed(const std::vector<std::string>& phrases, Backend& backend);

}  // namespace groupscope::embed

#endif  // GROUPSCOPE_EMBED_HPP_
