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

#include <cmath>
#include <numeric>

#include "groupscope/esf.hpp"
#include "oracles.hpp"

namespace esf = groupscope::esf;
namespace embed = groupscope::embed;
using Points = std::vector<std::vector<double>>;

namespace {

std::vector<embed::EmbeddingVector> whitelist(const Points& pts) {
  std::vector<embed::EmbeddingVector> out;
  for (size_t i = 0; i < pts.size(); ++i) out.push_back({"p" + std::to_string(i), pts[i], "test"});
  return out;
}

Points gram(const Points& pts, const esf::Kernel& k) {
  Points K(pts.size(), std::vector<double>(pts.size()));
  for (size_t i = 0; i < pts.size(); ++i)
    for (size_t j = 0; j < pts.size(); ++j) K[i][j] = k(pts[i], pts[j]);
  return K;
}

void check_feasible(const esf::OcsvmModel& m, size_t n) {
  double sum = std::accumulate(m.alphas.begin(), m.alphas.end(), 0.0);
  CHECK(std::abs(sum - 1.0) <= 1e-8);
  double c = 1.0 / (m.nu * static_cast<double>(n));
  for (double a : m.alphas) {
    CHECK(a >= 0.0);
    CHECK(a <= c + 1e-8);
  }
}

}  // namespace

TEST_SUITE("esf") {
  TEST_CASE("center of two points") {
    auto c = esf::fit_center({{0, 0}, {2, 0}});
    CHECK(c.center == std::vector<double>{1, 0});
    CHECK(c.radius_avg == doctest::Approx(1.0));
    CHECK(c.d_max == doctest::Approx(1.0));
  }

  TEST_CASE("center of a triangle") {
    auto c = esf::fit_center({{0, 0}, {2, 0}, {1, 3}});
    CHECK(c.center[0] == doctest::Approx(1.0));
    CHECK(c.center[1] == doctest::Approx(1.0));
    CHECK(std::abs(c.d_max - 2.0) <= 1e-12);
    CHECK(std::abs(c.radius_avg - (2 * std::sqrt(2.0) + 2) / 3) <= 1e-12);
  }

  TEST_CASE("identical points have zero radii") {
    esf::EsfOptions opts;
    opts.fit_svm = false;
    auto m = esf::fit(whitelist({{1, 2}, {1, 2}, {1, 2}}), opts);
    CHECK(m.radius_avg == 0.0);
    CHECK(m.d_max == 0.0);
    CHECK(esf::classify({1, 2}, m, esf::Mode::max_radius).accepted);
    CHECK_FALSE(esf::classify({1, 2.001}, m, esf::Mode::max_radius).accepted);
    CHECK_FALSE(esf::classify({1, 2.001}, m, esf::Mode::avg_radius).accepted);
  }

  TEST_CASE("degenerate and invalid input") {
    CHECK_THROWS_AS(esf::fit(whitelist({{1, 2}})), esf::DegenerateWhitelistError);
    CHECK_THROWS_AS(esf::fit_center({{1, 2}, {1, 2, 3}}), groupscope::ValidationError);
    CHECK_THROWS_AS(esf::fit_ocsvm({{0, 0}, {1, 1}}, 0.0, {}), groupscope::ValidationError);
    CHECK_THROWS_AS(esf::fit_ocsvm({{0, 0}, {1, 1}}, 1.5, {}), groupscope::ValidationError);
    esf::EsfOptions opts;
    opts.fit_svm = false;
    auto m = esf::fit(whitelist({{0, 0}, {2, 0}}), opts);
    CHECK_THROWS_AS(esf::classify({1, 1, 1}, m, esf::Mode::avg_radius), groupscope::ValidationError);
    CHECK_THROWS_AS(esf::classify({1, 1}, m, esf::Mode::ocsvm), groupscope::ValidationError);
  }

  TEST_CASE("radial boundaries are inclusive") {
    esf::EsfOptions opts;
    opts.fit_svm = false;
    auto m = esf::fit(whitelist({{0, 0}, {2, 0}, {1, 3}}), opts);
    auto far = esf::classify({1, 3}, m, esf::Mode::max_radius);
    CHECK(far.accepted);
    CHECK(far.score == doctest::Approx(2.0));
    CHECK_FALSE(esf::classify({1, 3}, m, esf::Mode::avg_radius).accepted);
    std::vector<double> twice = {1, 1 + 2 * 2.0};
    CHECK_FALSE(esf::classify(twice, m, esf::Mode::max_radius).accepted);
    CHECK_FALSE(esf::classify(twice, m, esf::Mode::avg_radius).accepted);
    CHECK(esf::classify(m.center, m, esf::Mode::avg_radius).accepted);
  }

  TEST_CASE("nu = 1 forces uniform alphas") {
    for (auto kind : {esf::KernelType::linear, esf::KernelType::rbf}) {
      auto m = esf::fit_ocsvm(oracle::twelve_points(), 1.0, {kind, 0.5});
      for (double a : m.alphas) CHECK(a == doctest::Approx(1.0 / 12).epsilon(1e-12));
    }
  }

  TEST_CASE("twelve-point linear fixture matches the enumeration oracle") {
    auto pts = oracle::twelve_points();
    esf::Kernel k{esf::KernelType::linear, 1.0};
    auto ref = oracle::ocsvm_dual(gram(pts, k), 0.25);
    REQUIRE(ref.has_value());
    CHECK(ref->free_count == 2);
    auto m = esf::fit_ocsvm(pts, 0.25, k);
    for (size_t i = 0; i < pts.size(); ++i) {
      CAPTURE(i);
      CHECK(std::abs(m.alphas[i] - ref->alphas[i]) <= 1e-4);
    }
    CHECK(std::abs(m.rho - ref->rho) <= 1e-4);
    // Cross-checked with an external convex solver when the fixture was designed.
    CHECK(std::abs(ref->rho - 14.116666667) <= 1e-6);
    check_feasible(m, pts.size());
  }

  TEST_CASE("gaussian cloud satisfies the nu-property") {
    auto pts = oracle::gaussian_cloud();
    esf::Kernel k{esf::KernelType::rbf, esf::median_heuristic_gamma(pts)};
    auto m = esf::fit_ocsvm(pts, 0.1, k);
    check_feasible(m, pts.size());
    size_t outliers = 0, svs = 0;
    for (size_t i = 0; i < pts.size(); ++i) {
      if (m.decision(pts[i]) < 0) ++outliers;
      if (m.alphas[i] > 0) ++svs;
    }
    CHECK(static_cast<double>(outliers) / pts.size() <= 0.15);
    CHECK(static_cast<double>(svs) / pts.size() >= 0.05);
  }

  TEST_CASE("center is accepted by the radial modes on the gaussian fixture") {
    auto m = esf::fit(whitelist(oracle::gaussian_cloud()));
    for (auto mode : {esf::Mode::avg_radius, esf::Mode::max_radius})
      CHECK(esf::classify(m.center, m, mode).accepted);
  }

  TEST_CASE("median heuristic") {
    // Squared distances 1, 4, 1 -> median 1.
    CHECK(esf::median_heuristic_gamma({{0, 0}, {1, 0}, {2, 0}}) == doctest::Approx(1.0));
    // Squared distances 1, 4, 9, 1, 4, 1 -> median (1 + 4) / 2.
    CHECK(esf::median_heuristic_gamma({{0, 0}, {1, 0}, {2, 0}, {3, 0}}) == doctest::Approx(1.0 / 2.5));
  }

  TEST_CASE("fitting is deterministic and serialization round-trips exactly") {
    auto wl = whitelist(oracle::gaussian_cloud(40, 5));
    auto a = esf::fit(wl);
    auto b = esf::fit(wl);
    CHECK(esf::serialize_model(a) == esf::serialize_model(b));
    CHECK(a.digest() == b.digest());
    auto back = esf::parse_model(esf::serialize_model(a));
    CHECK(esf::serialize_model(back) == esf::serialize_model(a));
    CHECK(back.center == a.center);
    CHECK(back.ocsvm->alphas == a.ocsvm->alphas);
    for (const auto& p : oracle::gaussian_cloud(20, 6))
      CHECK(esf::classify(p, back, esf::Mode::ocsvm).score == esf::classify(p, a, esf::Mode::ocsvm).score);
  }

  TEST_CASE("cosine metric normalizes first") {
    esf::EsfOptions opts;
    opts.metric = esf::Metric::cosine;
    opts.fit_svm = false;
    auto m = esf::fit(whitelist({{1, 0}, {0, 1}}), opts);
    CHECK(esf::classify({5, 5}, m, esf::Mode::avg_radius).accepted);
    CHECK(esf::classify({10, 0}, m, esf::Mode::max_radius).accepted);
    CHECK_FALSE(esf::classify({-1, 0}, m, esf::Mode::max_radius).accepted);
  }

  TEST_CASE("filter partitions and keeps order") {
    esf::EsfOptions opts;
    opts.fit_svm = false;
    auto m = esf::fit(whitelist({{0, 0}, {2, 0}, {1, 3}}), opts);
    auto cand = [](const std::string& phrase, std::optional<std::vector<double>> v) {
      groupscope::llm::CandidateGroup c;
      c.candidate_id = phrase;
      c.surface_phrase = phrase;
      c.occurrence_count = 1;
      if (v) c.embedding = embed::EmbeddingVector{phrase, *v, "test"};
      return c;
    };
    auto r = esf::filter_candidates({cand("near", std::vector<double>{1, 1}), cand("none", std::nullopt),
                                     cand("far", std::vector<double>{9, 9}), cand("edge", std::vector<double>{1, 0.5})},
                                    m, esf::Mode::avg_radius);
    REQUIRE(r.accepted.size() == 2);
    CHECK(r.accepted[0].surface_phrase == "near");
    CHECK(r.accepted[1].surface_phrase == "edge");
    REQUIRE(r.rejected.size() == 1);
    CHECK(r.rejected[0].verdicts.size() == 2);
    REQUIRE(r.unresolved.size() == 1);
    CHECK(r.unresolved[0].verdicts.empty());
    auto empty = esf::filter_candidates({}, m, esf::Mode::avg_radius);
    CHECK(empty.accepted.empty());
    CHECK(empty.rejected.empty());
  }
}
