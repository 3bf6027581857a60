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

#include <atomic>
#include <cmath>
#include <httplib.h>
#include <json.hpp>
#include <mutex>
#include <thread>

#include "groupscope/embed.hpp"
#include "support.hpp"

namespace embed = groupscope::embed;

namespace {

const char* kStore =
    "frauen\t1\t0\t0\t0\t0\t0\t0\t0\n"
    "bauern\t0\t1\t0\t0\t0\t0\t0\t0\n"
    "rentner\t0\t0\t1\t0\t0\t0\t0\t0\n"
    "arbeiter\t0\t0\t0\t1\t0\t0\t0\t0\n"
    "familien\t0\t0\t0\t0\t1\t0\t0\t0\n";

std::vector<std::vector<double>> vectors_of(const std::vector<embed::EmbeddingLookup>& lookups) {
  std::vector<std::vector<double>> out;
  for (const auto& l : lookups) out.push_back(l.missing() ? std::vector<double>{} : l.embedding->vector);
  return out;
}

std::string reply_for(const std::string& body) {
  auto in = nlohmann::json::parse(body);
  nlohmann::json vectors = nlohmann::json::array();
  for (const auto& p : in["inputs"]) {
    double len = static_cast<double>(p.get<std::string>().size());
    vectors.push_back({len, 1.0, -len});
  }
  return nlohmann::json{{"vectors", vectors}}.dump();
}

}  // namespace

TEST_SUITE("embed") {
  TEST_CASE("store parsing") {
    auto store = embed::parse_store(kStore);
    CHECK(store.dimension() == 8);
    CHECK(store.size() == 5);
    CHECK(store.find("rentner") != nullptr);
    CHECK(embed::parse_store(store.to_tsv()).entries() == store.entries());
  }

  TEST_CASE("inconsistent width is fatal at its line") {
    std::string bad = std::string(kStore) + "kinder\t1\t2\t3\t4\t5\t6\t7\n";
    try {
      embed::parse_store(bad);
      FAIL("expected a width error");
    } catch (const groupscope::ValidationError& e) {
      CHECK(std::string(e.what()).find("line 6") != std::string::npos);
    }
    CHECK_THROWS_WITH_AS(embed::parse_store("a\t1\tx\n"), doctest::Contains("line 1"), groupscope::ValidationError);
  }

  TEST_CASE("empty store") {
    CHECK_THROWS_AS(embed::parse_store(""), embed::EmptyStoreError);
    testing::TempDir dir;
    testing::spit(dir / "empty.tsv", "");
    CHECK_THROWS_AS(embed::load_store(dir / "empty.tsv"), embed::EmptyStoreError);
  }

  TEST_CASE("file backend lookup and missing marker") {
    embed::FileBackend backend(embed::parse_store(kStore));
    auto got = embed::embed({"Frauen", "Bauern"}, backend);
    REQUIRE(got.size() == 2);
    CHECK(got[0].embedding->vector[0] == 1.0);
    CHECK(got[1].embedding->vector[1] == 1.0);
    auto missing = embed::embed({"unbekannt"}, backend);
    REQUIRE(missing.size() == 1);
    CHECK(missing[0].missing());
    CHECK(missing[0].phrase == "unbekannt");
  }

  TEST_CASE("empty phrase is rejected") {
    embed::TestBackend backend(8, 1);
    CHECK_THROWS_AS(embed::embed({"  "}, backend), groupscope::ValidationError);
  }

  TEST_CASE("test backend is deterministic, unit norm and batch-equivalent") {
    embed::TestBackend backend(16, 7);
    auto a = embed::embed({"Frauen"}, backend);
    auto b = embed::embed({"Frauen"}, backend);
    CHECK(vectors_of(a) == vectors_of(b));
    std::vector<std::string> phrases = {"frauen", "bauern", "junge menschen", "ärzte", "x"};
    for (const auto& l : embed::embed(phrases, backend)) {
      double n = 0;
      for (double v : l.embedding->vector) n += v * v;
      CHECK(std::abs(std::sqrt(n) - 1.0) <= 1e-9);
    }
    std::vector<std::string> left(phrases.begin(), phrases.begin() + 2), right(phrases.begin() + 2, phrases.end());
    auto whole = vectors_of(embed::embed(phrases, backend));
    auto first = vectors_of(embed::embed(left, backend));
    auto second = vectors_of(embed::embed(right, backend));
    first.insert(first.end(), second.begin(), second.end());
    CHECK(whole == first);
    embed::TestBackend other(16, 8);
    CHECK(vectors_of(embed::embed({"frauen"}, other)) != vectors_of(a));
  }

  TEST_CASE("file backend batch equivalence") {
    embed::FileBackend backend(embed::parse_store(kStore));
    auto whole = vectors_of(embed::embed({"frauen", "nope", "rentner"}, backend));
    auto a = vectors_of(embed::embed({"frauen"}, backend));
    auto b = vectors_of(embed::embed({"nope", "rentner"}, backend));
    a.insert(a.end(), b.begin(), b.end());
    CHECK(whole == a);
  }

  TEST_CASE("http backend batches and preserves order") {
    std::mutex mu;
    std::vector<size_t> batch_sizes;
    embed::HttpBackendConfig cfg;
    cfg.batch_size = 2;
    cfg.max_in_flight = 2;
    embed::HttpBackend backend(cfg, [&](const std::string& body) {
      std::lock_guard lock(mu);
      batch_sizes.push_back(nlohmann::json::parse(body)["inputs"].size());
      return embed::HttpReply{200, reply_for(body)};
    });
    auto got = embed::embed({"a", "bb", "ccc", "dddd", "eeeee"}, backend);
    REQUIRE(got.size() == 5);
    for (size_t i = 0; i < got.size(); ++i) CHECK(got[i].embedding->vector[0] == static_cast<double>(i + 1));
    std::sort(batch_sizes.begin(), batch_sizes.end());
    CHECK(batch_sizes == std::vector<size_t>{1, 2, 2});
  }

  TEST_CASE("http retries transient failures with exponential backoff") {
    std::vector<long> waits;
    int calls = 0;
    embed::HttpBackendConfig cfg;
    cfg.retry.sleep = [&](std::chrono::milliseconds d) { waits.push_back(d.count()); };
    embed::HttpBackend backend(cfg, [&](const std::string& body) {
      return ++calls <= 2 ? embed::HttpReply{503, ""} : embed::HttpReply{200, reply_for(body)};
    });
    auto got = embed::embed({"frauen"}, backend);
    CHECK(calls == 3);
    CHECK(got[0].embedding->vector[0] == 6.0);
    CHECK(waits == std::vector<long>{200, 400});
  }

  TEST_CASE("http exhausted retries carry the failing batch") {
    int calls = 0;
    embed::HttpBackendConfig cfg;
    cfg.retry.sleep = [](std::chrono::milliseconds) {};
    embed::HttpBackend backend(cfg, [&](const std::string&) {
      ++calls;
      return embed::HttpReply{0, "refused"};
    });
    try {
      embed::embed({"frauen", "bauern"}, backend);
      FAIL("expected a transport error");
    } catch (const embed::TransportError& e) {
      CHECK(calls == 3);
      CHECK(e.failed_batch == std::vector<std::string>{"frauen", "bauern"});
    }
  }

  TEST_CASE("http client errors are not retried") {
    int calls = 0;
    embed::HttpBackendConfig cfg;
    embed::HttpBackend backend(cfg, [&](const std::string&) {
      ++calls;
      return embed::HttpReply{400, "bad"};
    });
    CHECK_THROWS_AS(embed::embed({"frauen"}, backend), embed::TransportError);
    CHECK(calls == 1);
  }

  TEST_CASE("dimension mismatch across responses is store corruption") {
    embed::HttpBackendConfig cfg;
    cfg.batch_size = 1;
    embed::HttpBackend backend(cfg, [&](const std::string& body) {
      auto in = nlohmann::json::parse(body);
      nlohmann::json v = in["inputs"][0] == "a" ? nlohmann::json{{1.0, 2.0}} : nlohmann::json{{1.0, 2.0, 3.0}};
      return embed::HttpReply{200, nlohmann::json{{"vectors", v}}.dump()};
    });
    CHECK_THROWS_AS(embed::embed({"a", "b"}, backend), embed::StoreCorruptionError);
  }

  TEST_CASE("http backend against a local server") {
    httplib::Server server;
    std::atomic<int> hits{0};
    std::string auth;
    server.Post("/embed", [&](const httplib::Request& req, httplib::Response& res) {
      if (++hits == 1) {
        res.status = 502;
        return;
      }
      auth = req.get_header_value("Authorization");
      res.set_content(reply_for(req.body), "application/json");
    });
    int port = server.bind_to_any_port("127.0.0.1");
    std::thread t([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    embed::HttpBackendConfig cfg;
    cfg.url = "http://127.0.0.1:" + std::to_string(port) + "/embed";
    cfg.token = "secret";
    cfg.retry.sleep = [](std::chrono::milliseconds) {};
    embed::HttpBackend backend(cfg);
    auto got = embed::embed({"Rentner", "Bauern"}, backend);
    server.stop();
    t.join();
    REQUIRE(got.size() == 2);
    CHECK(got[0].embedding->vector == std::vector<double>{7, 1, -7});
    CHECK(got[1].embedding->backend_id == "http");
    CHECK(auth == "Bearer secret");
    CHECK(hits == 2);
  }
}
