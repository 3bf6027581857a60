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

#ifndef GROUPSCOPE_ECONOMETRICS_HPP_
#define GROUPSCOPE_ECONOMETRICS_HPP_

#include <optional>
#include <string>
#include <vector>

#include "groupscope/corpus.hpp"
#include "groupscope/error.hpp"
#include "groupscope/metrics.hpp"

namespace groupscope::econ {

class RankDeficiencyError : public ValidationError {
 public:
  RankDeficiencyError(const std::string& column);
  std::string column;
};

struct PanelRow {
  std::string party_id;
  std::string election_id;
  corpus::Date election_date;
  std::string country;
  double similarity = 0.0;
  std::optional<double> rr_support_lag1;
  std::optional<double> centre_vote_diff;
  std::optional<double> gov_party;  // 0 or 1
  std::optional<double> centre_vote_share;
  std::string cluster_id;

  // Value of a named regressor; absent when missing.
  std::optional<double> value(std::string_view term) const;
};

// One observation of a party's vote share.
struct VoteRecord {
  std::string party_id;
  std::string country;
  corpus::Date election_date;
  double vote_share_pct = 0.0;
};

// Must be ordered by election_date within each party.
std::vector<VoteRecord> parse_vote_history_csv(std::string_view content);
std::vector<VoteRecord> vote_history_from_corpus(const std::vector<corpus::Manifesto>& manifestos);

// The similarity records name centre and radical-right manifestos by doc_id;
// `meta` resolves them to parties and elections.
std::vector<PanelRow> build_panel(const std::vector<metrics::SimilarityRecord>& similarities,
                                  const std::vector<corpus::Manifesto>& meta,
                                  const std::vector<VoteRecord>& vote_history);

std::string panel_csv(const std::vector<PanelRow>& panel);
std::vector<PanelRow> parse_panel_csv(std::string_view content);

struct ModelSpec {
  std::string name;
  std::vector<std::string> terms;  // "a:b" denotes the product of a and b
  bool party_fixed_effects = true;
  bool cluster_robust = true;
};

// The three specifications reported side by side.
std::vector<ModelSpec> default_specs();

struct OlsFit {
  std::string name;
  std::vector<std::string> terms;  // "(Intercept)", regressors, then FE dummies
  std::vector<double> coefficients;
  std::vector<double> std_errors;  // CR1 clustered, or classical when not clustered
  std::vector<double> p_values;
  std::vector<std::string> fixed_effect_terms;
  double r2 = 0.0;
  double adj_r2 = 0.0;
  double f_stat = 0.0;  // classical
  double f_p_value = 1.0;
  double rss = 0.0;
  size_t n_obs = 0;
  size_t n_params = 0;
  size_t n_clusters = 0;

  std::optional<size_t> index_of(std::string_view term) const;
};

// Listwise-deletes rows missing any used term, then fits by pivoted QR.
OlsFit fit_ols_fe(const std::vector<PanelRow>& panel, const ModelSpec& spec);

// Plain design-matrix OLS shared by fit_ols_fe. `x` is row-major n x k.
struct DesignFit {
  std::vector<double> beta;
  std::vector<double> residuals;
  std::vector<double> bread;  // (X'X)^-1, row-major k x k
};
DesignFit least_squares(const std::vector<double>& x, size_t n, size_t k, const std::vector<double>& y,
                        const std::vector<std::string>& column_names);

// CR1 sandwich covariance, row-major k x k.
std::vector<double> cluster_robust_covariance(const std::vector<double>& x, size_t n, size_t k,
                                              const DesignFit& fit,
                                              const std::vector<std::string>& clusters);

std::string significance_stars(double p);
std::string term_label(std::string_view term);

// Side-by-side table; terms missing from a model leave blank cells.
std::string report_text(const std::vector<OlsFit>& fits);
std::string report_csv(const std::vector<OlsFit>& fits);

}  // namespace groupscope::econ

#endif  // GROUPSCOPE_ECONOMETRICS_HPP_
