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
#include <map>
#include <set>

#include "groupscope/econometrics.hpp"
#include "oracles.hpp"
#include "support.hpp"

namespace econ = groupscope::econ;
namespace corpus = groupscope::corpus;
namespace metrics = groupscope::metrics;

namespace {

corpus::Date date(const char* iso) { return *corpus::Date::parse(iso); }

// Three parties over four elections in one country.
struct SmallPanel {
  std::vector<corpus::Manifesto> meta;
  std::vector<metrics::SimilarityRecord> sims;
};

SmallPanel small_panel() {
  const char* dates[] = {"2001-09-22", "2005-09-18", "2009-09-27", "2013-09-22"};
  const std::map<std::string, std::vector<double>> shares = {
      {"sdp", {30, 25, 28, 22}}, {"cdp", {35, 33, 30, 31}}, {"rrp", {5, 8, 12, 15}}};
  const std::map<std::string, std::vector<bool>> gov = {
      {"sdp", {false, true, true, false}}, {"cdp", {true, false, false, true}}, {"rrp", {false, false, false, false}}};
  SmallPanel p;
  for (size_t e = 0; e < 4; ++e) {
    for (const auto& [party, v] : shares) {
      corpus::Manifesto m;
      m.doc_id = party + "-" + std::to_string(e);
      m.party_id = party;
      m.party_family = party == "rrp" ? corpus::PartyFamily::RadicalRight
                       : party == "sdp" ? corpus::PartyFamily::CentreLeft
                                        : corpus::PartyFamily::CentreRight;
      m.country = "XX";
      m.election_date = date(dates[e]);
      m.language = "en";
      m.vote_share_pct = v[e];
      m.in_government_prior = gov.at(party)[e];
      p.meta.push_back(m);
    }
    for (const char* centre : {"sdp", "cdp"}) {
      metrics::SimilarityRecord r;
      r.election_id = "XX-" + std::string(dates[e]);
      r.centre_doc_id = std::string(centre) + "-" + std::to_string(e);
      r.rr_doc_id = "rrp-" + std::to_string(e);
      r.similarity = 50.0 + 10.0 * e + (centre[0] == 's' ? 1.0 : 0.0);
      p.sims.push_back(r);
    }
  }
  return p;
}

std::vector<econ::PanelRow> panel20() {
  return econ::parse_panel_csv(testing::slurp(testing::fixtures() / "unit" / "panel20.csv"));
}

struct Design {
  oracle::Matrix X;
  std::vector<long double> y;
  std::vector<std::string> clusters;
};

// Intercept, terms, then dummies for every party but the first.
Design design(const std::vector<econ::PanelRow>& panel, const std::vector<std::string>& terms, bool fe) {
  std::set<std::string> parties;
  for (const auto& r : panel) parties.insert(r.party_id);
  std::vector<std::string> dummies(std::next(parties.begin()), parties.end());
  Design d;
  for (const auto& r : panel) {
    std::vector<long double> row = {1.0L};
    bool complete = true;
    for (const auto& t : terms) {
      long double v = 1.0L;
      size_t pos = 0;
      while (true) {
        size_t c = t.find(':', pos);
        auto part = r.value(t.substr(pos, c == std::string::npos ? std::string::npos : c - pos));
        if (!part) complete = false;
        else v *= *part;
        if (c == std::string::npos) break;
        pos = c + 1;
      }
      row.push_back(v);
    }
    if (!complete) continue;
    if (fe)
      for (const auto& p : dummies) row.push_back(r.party_id == p ? 1.0L : 0.0L);
    d.X.push_back(row);
    d.y.push_back(r.similarity);
    d.clusters.push_back(r.cluster_id);
  }
  return d;
}

}  // namespace

TEST_SUITE("econometrics") {

TEST_CASE("build_panel derives lags, vote differences and government status") {
  auto p = small_panel();
  auto rows = econ::build_panel(p.sims, p.meta, econ::vote_history_from_corpus(p.meta));
  REQUIRE(rows.size() == 8);
  struct Expect {
    const char* party;
    std::optional<double> lag, diff;
    double gov, share;
  };
  const Expect expect[] = {
      {"cdp", std::nullopt, std::nullopt, 1, 35}, {"sdp", std::nullopt, std::nullopt, 0, 30},
      {"cdp", 5.0, std::nullopt, 0, 33},          {"sdp", 5.0, std::nullopt, 1, 25},
      {"cdp", 8.0, -2.0, 0, 30},                  {"sdp", 8.0, -5.0, 1, 28},
      {"cdp", 12.0, -3.0, 1, 31},                 {"sdp", 12.0, 3.0, 0, 22},
  };
  for (size_t i = 0; i < rows.size(); ++i) {
    CAPTURE(i);
    CHECK(rows[i].party_id == expect[i].party);
    CHECK(rows[i].rr_support_lag1 == expect[i].lag);
    CHECK(rows[i].centre_vote_diff == expect[i].diff);
    CHECK(rows[i].gov_party == expect[i].gov);
    CHECK(rows[i].centre_vote_share == expect[i].share);
    CHECK(rows[i].cluster_id == rows[i].election_id);
  }
  CHECK(rows[0].election_id == "XX-2001-09-22");
  CHECK(rows[5].similarity == doctest::Approx(71.0));
}

TEST_CASE("vote difference is current minus previous share") {
  // 30 then 25 gives -5 at the following election.
  auto p = small_panel();
  auto rows = econ::build_panel(p.sims, p.meta, econ::vote_history_from_corpus(p.meta));
  CHECK(*rows[5].centre_vote_diff == doctest::Approx(25.0 - 30.0));
}

TEST_CASE("build_panel rejects bad inputs") {
  auto p = small_panel();
  auto history = econ::vote_history_from_corpus(p.meta);
  SUBCASE("unordered history") {
    std::vector<econ::VoteRecord> shuffled = {{"sdp", "XX", date("2005-09-18"), 25},
                                              {"sdp", "XX", date("2001-09-22"), 30}};
    CHECK_THROWS_AS(econ::build_panel(p.sims, p.meta, shuffled), groupscope::ValidationError);
  }
  SUBCASE("unknown document") {
    p.sims[0].rr_doc_id = "nope";
    CHECK_THROWS_AS(econ::build_panel(p.sims, p.meta, history), groupscope::ValidationError);
  }
  SUBCASE("duplicate row") {
    p.sims.push_back(p.sims[0]);
    CHECK_THROWS_AS(econ::build_panel(p.sims, p.meta, history), groupscope::ValidationError);
  }
}

TEST_CASE("vote history CSV") {
  auto h = econ::parse_vote_history_csv(
      "party_id,country,election_date,vote_share_pct\nsdp,XX,2001-09-22,30\nsdp,XX,2005-09-18,25.5\n");
  REQUIRE(h.size() == 2);
  CHECK(h[1].vote_share_pct == 25.5);
  CHECK_THROWS_AS(econ::parse_vote_history_csv("party_id,country,election_date\n"), groupscope::ValidationError);
  CHECK_THROWS_AS(econ::parse_vote_history_csv("party_id,country,election_date,vote_share_pct\na,XX,2001-01-01,101\n"),
                  groupscope::ValidationError);
}

TEST_CASE("panel CSV round trip") {
  auto rows = panel20();
  REQUIRE(rows.size() == 20);
  auto again = econ::parse_panel_csv(econ::panel_csv(rows));
  REQUIRE(again.size() == rows.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    CHECK(again[i].similarity == rows[i].similarity);
    CHECK(again[i].rr_support_lag1 == rows[i].rr_support_lag1);
    CHECK(again[i].centre_vote_diff == rows[i].centre_vote_diff);
    CHECK(again[i].cluster_id == rows[i].cluster_id);
  }
}

TEST_CASE("fixed-effects OLS matches the normal-equation oracle") {
  auto rows = panel20();
  const size_t expected_n[] = {18, 17, 16};
  auto specs = econ::default_specs();
  for (size_t s = 0; s < specs.size(); ++s) {
    CAPTURE(specs[s].name);
    auto fit = econ::fit_ols_fe(rows, specs[s]);
    auto d = design(rows, specs[s].terms, true);
    auto ref = oracle::normal_equations(d.X, d.y);
    auto se = oracle::clustered_se(d.X, ref, d.clusters);
    CHECK(fit.n_obs == expected_n[s]);
    CHECK(fit.n_clusters == 5);
    REQUIRE(fit.coefficients.size() == ref.beta.size());
    CHECK(fit.fixed_effect_terms == std::vector<std::string>{"party[pb]", "party[pc]"});
    for (size_t j = 0; j < ref.beta.size(); ++j) {
      CAPTURE(fit.terms[j]);
      CHECK(std::fabs(fit.coefficients[j] - static_cast<double>(ref.beta[j])) < 1e-8);
      CHECK(std::fabs(fit.std_errors[j] - static_cast<double>(se[j])) < 1e-8);
    }
  }
}

TEST_CASE("slopes equal within-party demeaned regression") {
  auto rows = panel20();
  const std::vector<std::string> terms = {"rr_support_lag1", "gov_party", "centre_vote_share"};
  auto fit = econ::fit_ols_fe(rows, {"fwl", terms, true, true});

  std::vector<const econ::PanelRow*> used;
  for (const auto& r : rows)
    if (r.rr_support_lag1) used.push_back(&r);
  std::map<std::string, std::vector<long double>> sum;
  std::map<std::string, int> count;
  for (const auto* r : used) {
    auto& s = sum[r->party_id];
    s.resize(4, 0.0L);
    s[0] += r->similarity;
    for (size_t t = 0; t < 3; ++t) s[t + 1] += *r->value(terms[t]);
    ++count[r->party_id];
  }
  oracle::Matrix X;
  std::vector<long double> y;
  for (const auto* r : used) {
    const auto& s = sum[r->party_id];
    long double c = count[r->party_id];
    y.push_back(r->similarity - s[0] / c);
    std::vector<long double> row;
    for (size_t t = 0; t < 3; ++t) row.push_back(*r->value(terms[t]) - s[t + 1] / c);
    X.push_back(row);
  }
  auto ref = oracle::normal_equations(X, y);
  for (size_t t = 0; t < 3; ++t)
    CHECK(std::fabs(fit.coefficients[*fit.index_of(terms[t])] - static_cast<double>(ref.beta[t])) < 1e-8);
}

TEST_CASE("singleton clusters reduce CR1 to HC1") {
  auto rows = panel20();
  for (size_t i = 0; i < rows.size(); ++i) rows[i].cluster_id = "c" + std::to_string(i);
  auto spec = econ::default_specs()[0];
  auto fit = econ::fit_ols_fe(rows, spec);
  auto d = design(rows, spec.terms, true);
  auto ref = oracle::normal_equations(d.X, d.y);
  auto hc1 = oracle::hc1_se(d.X, ref);
  for (size_t j = 0; j < hc1.size(); ++j) CHECK(std::fabs(fit.std_errors[j] - static_cast<double>(hc1[j])) < 1e-8);
}

TEST_CASE("perfect linear fit without fixed effects") {
  std::vector<econ::PanelRow> rows;
  for (int i = 0; i < 6; ++i) {
    econ::PanelRow r;
    r.party_id = "p" + std::to_string(i % 2);
    r.cluster_id = "c" + std::to_string(i % 3);
    r.rr_support_lag1 = i;
    r.similarity = 2.0 * i + 3.0;
    rows.push_back(r);
  }
  auto fit = econ::fit_ols_fe(rows, {"line", {"rr_support_lag1"}, false, false});
  CHECK(fit.coefficients[0] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(fit.coefficients[1] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(fit.r2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit.rss < 1e-20);
  CHECK(fit.fixed_effect_terms.empty());
}

TEST_CASE("listwise deletion per specification") {
  auto rows = panel20();
  std::vector<size_t> n;
  for (const auto& spec : econ::default_specs()) n.push_back(econ::fit_ols_fe(rows, spec).n_obs);
  CHECK(n == std::vector<size_t>{18, 17, 16});
}

TEST_CASE("degenerate designs are rejected") {
  auto rows = panel20();
  SUBCASE("constant regressor collides with the intercept") {
    for (auto& r : rows) r.centre_vote_share = 10.0;
    try {
      econ::fit_ols_fe(rows, {"rd", {"centre_vote_share"}, true, true});
      FAIL("expected RankDeficiencyError");
    } catch (const econ::RankDeficiencyError& e) {
      CHECK(!e.column.empty());
    }
  }
  SUBCASE("one cluster") {
    for (auto& r : rows) r.cluster_id = "only";
    CHECK_THROWS_AS(econ::fit_ols_fe(rows, econ::default_specs()[0]), groupscope::ValidationError);
  }
  SUBCASE("unknown regressor") {
    CHECK_THROWS_AS(econ::fit_ols_fe(rows, {"x", {"turnout"}, true, true}), groupscope::ValidationError);
  }
  SUBCASE("too few rows") {
    rows.resize(4);
    CHECK_THROWS_AS(econ::fit_ols_fe(rows, econ::default_specs()[2]), groupscope::ValidationError);
  }
}

TEST_CASE("shifting the outcome moves only the intercept") {
  auto rows = panel20();
  auto spec = econ::default_specs()[2];
  auto base = econ::fit_ols_fe(rows, spec);
  for (auto& r : rows) r.similarity += 7.5;
  auto shifted = econ::fit_ols_fe(rows, spec);
  CHECK(shifted.coefficients[0] == doctest::Approx(base.coefficients[0] + 7.5).epsilon(1e-10));
  for (size_t j = 1; j < base.coefficients.size(); ++j) {
    CHECK(std::fabs(shifted.coefficients[j] - base.coefficients[j]) < 1e-9);
    CHECK(std::fabs(shifted.std_errors[j] - base.std_errors[j]) < 1e-9);
  }
}

TEST_CASE("relabeling clusters leaves standard errors unchanged") {
  auto rows = panel20();
  auto base = econ::fit_ols_fe(rows, econ::default_specs()[1]);
  for (auto& r : rows) r.cluster_id = "zz-" + std::string(r.cluster_id.rbegin(), r.cluster_id.rend());
  auto relabeled = econ::fit_ols_fe(rows, econ::default_specs()[1]);
  for (size_t j = 0; j < base.std_errors.size(); ++j)
    CHECK(std::fabs(relabeled.std_errors[j] - base.std_errors[j]) < 1e-12);
}

TEST_CASE("significance stars") {
  CHECK(econ::significance_stars(0.0005) == "***");
  CHECK(econ::significance_stars(0.001) == "**");
  CHECK(econ::significance_stars(0.0099) == "**");
  CHECK(econ::significance_stars(0.01) == "*");
  CHECK(econ::significance_stars(0.049) == "*");
  CHECK(econ::significance_stars(0.05) == "");
  CHECK(econ::significance_stars(std::nan("")) == "");
}

TEST_CASE("report tables") {
  auto rows = panel20();
  std::vector<econ::OlsFit> fits;
  for (const auto& spec : econ::default_specs()) fits.push_back(econ::fit_ols_fe(rows, spec));
  auto text = econ::report_text(fits);
  CHECK(text.find("Radical Right support (t-1)") != std::string::npos);
  CHECK(text.find("RR support(t-1):Vote diff. Centre") != std::string::npos);
  CHECK(text.find("Constant") != std::string::npos);
  CHECK(text.find("Party fixed effects") != std::string::npos);
  CHECK(text.find("Note: *p<0.05; **p<0.01; ***p<0.001") != std::string::npos);

  // Vote difference is absent from model (1): its first cell is blank.
  auto line_start = text.find("Vote difference Centre");
  REQUIRE(line_start != std::string::npos);
  auto line = text.substr(line_start, text.find('\n', line_start) - line_start);
  CHECK(line.substr(36, 16) == std::string(16, ' '));

  auto csv = econ::report_csv(fits);
  CHECK(csv.rfind("term,statistic,(1),(2),(3)\n", 0) == 0);
  CHECK(csv.find("centre_vote_diff,estimate,,") != std::string::npos);
  CHECK(csv.find("n_obs,,18,17,16") != std::string::npos);

  // A zero coefficient with zero spread prints as 0.000 without stars.
  std::vector<econ::PanelRow> flat;
  for (int i = 0; i < 6; ++i) {
    econ::PanelRow r;
    r.party_id = "p";
    r.cluster_id = "c" + std::to_string(i % 2);
    r.rr_support_lag1 = i;
    r.similarity = 4.0;
    flat.push_back(r);
  }
  auto zero = econ::fit_ols_fe(flat, {"z", {"rr_support_lag1"}, true, false});
  auto zt = econ::report_text({zero});
  auto zl = zt.substr(zt.find("Radical Right support (t-1)"));
  zl = zl.substr(0, zl.find('\n'));
  CHECK(zl.find("0.000") != std::string::npos);
  CHECK(zl.find('*') == std::string::npos);
}

}  // TEST_SUITE
