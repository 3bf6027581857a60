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

#include "groupscope/econometrics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <map>
#include <set>
#include <tuple>

#include "groupscope/io.hpp"

namespace groupscope::econ {

RankDeficiencyError::RankDeficiencyError(const std::string& col)
    : ValidationError("rank-deficient design: column \"" + col + "\" is linearly dependent on the others"),
      column(col) {}

namespace {

const std::set<std::string>& known_terms() {
  static const std::set<std::string> terms = {"rr_support_lag1", "centre_vote_diff", "gov_party",
                                              "centre_vote_share", "similarity"};
  return terms;
}

std::vector<std::string> split_interaction(std::string_view term) {
  std::vector<std::string> parts;
  size_t pos = 0;
  while (true) {
    size_t colon = term.find(':', pos);
    parts.emplace_back(term.substr(pos, colon == std::string_view::npos ? std::string_view::npos : colon - pos));
    if (colon == std::string_view::npos) break;
    pos = colon + 1;
  }
  return parts;
}

}  // namespace

std::optional<double> PanelRow::value(std::string_view term) const {
  if (term.find(':') != std::string_view::npos) {
    double product = 1.0;
    for (const auto& part : split_interaction(term)) {
      auto v = value(part);
      if (!v) return std::nullopt;
      product *= *v;
    }
    return product;
  }
  if (term == "rr_support_lag1") return rr_support_lag1;
  if (term == "centre_vote_diff") return centre_vote_diff;
  if (term == "gov_party") return gov_party;
  if (term == "centre_vote_share") return centre_vote_share;
  if (term == "similarity") return similarity;
  return std::nullopt;
}

std::vector<VoteRecord> parse_vote_history_csv(std::string_view content) {
  io::CsvTable table = io::parse_csv(content);
  auto col = [&](const char* name) -> size_t {
    auto it = std::find(table.header.begin(), table.header.end(), name);
    if (it == table.header.end()) throw ValidationError(std::string("vote history lacks column ") + name);
    return static_cast<size_t>(it - table.header.begin());
  };
  size_t party = col("party_id"), country = col("country"), date = col("election_date"),
         share = col("vote_share_pct");
  std::vector<VoteRecord> out;
  for (size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    std::string where = "vote history line " + std::to_string(table.row_lines[r]);
    if (row.size() != table.header.size()) throw ValidationError(where + ": wrong field count");
    auto d = corpus::Date::parse(row[date]);
    if (!d) throw ValidationError(where + ": bad election_date");
    char* end = nullptr;
    double v = std::strtod(row[share].c_str(), &end);
    if (row[share].empty() || end != row[share].c_str() + row[share].size() || v < 0 || v > 100)
      throw ValidationError(where + ": bad vote_share_pct");
    out.push_back({row[party], row[country], *d, v});
  }
  return out;
}

std::vector<VoteRecord> vote_history_from_corpus(const std::vector<corpus::Manifesto>& manifestos) {
  std::vector<VoteRecord> out;
  for (const auto& m : manifestos)
    if (m.vote_share_pct) out.push_back({m.party_id, m.country, m.election_date, *m.vote_share_pct});
  std::stable_sort(out.begin(), out.end(), [](const VoteRecord& a, const VoteRecord& b) {
    return std::tie(a.party_id, a.election_date) < std::tie(b.party_id, b.election_date);
  });
  return out;
}

std::vector<PanelRow> build_panel(const std::vector<metrics::SimilarityRecord>& similarities,
                                  const std::vector<corpus::Manifesto>& meta,
                                  const std::vector<VoteRecord>& vote_history) {
  std::map<std::string, const corpus::Manifesto*> docs;
  for (const auto& m : meta) docs[m.doc_id] = &m;

  std::map<std::string, corpus::Date> last_seen;
  std::map<std::pair<std::string, corpus::Date>, double> share;
  std::map<std::string, std::set<corpus::Date>> elections;  // country -> dates
  for (const auto& v : vote_history) {
    auto it = last_seen.find(v.party_id);
    if (it != last_seen.end() && !(it->second < v.election_date))
      throw ValidationError("vote history for party " + v.party_id + " is not ordered by election_date");
    last_seen[v.party_id] = v.election_date;
    share[{v.party_id, v.election_date}] = v.vote_share_pct;
    elections[v.country].insert(v.election_date);
  }
  for (const auto& m : meta) {
    elections[m.country].insert(m.election_date);
    if (m.vote_share_pct) share.try_emplace({m.party_id, m.election_date}, *m.vote_share_pct);
  }
  auto share_at = [&](const std::string& party, const corpus::Date& d) -> std::optional<double> {
    auto it = share.find({party, d});
    if (it == share.end()) return std::nullopt;
    return it->second;
  };

  std::vector<PanelRow> rows;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& rec : similarities) {
    auto ic = docs.find(rec.centre_doc_id);
    auto ir = docs.find(rec.rr_doc_id);
    if (ic == docs.end() || ir == docs.end()) {
      throw ValidationError("similarity record " + rec.election_id + " (" + rec.centre_doc_id + " vs " +
                            rec.rr_doc_id + ") references an unknown party document");
    }
    const auto& centre = *ic->second;
    const auto& rr = *ir->second;

    PanelRow row;
    row.party_id = centre.party_id;
    row.election_id = centre.election_id();
    row.election_date = centre.election_date;
    row.country = centre.country;
    row.similarity = rec.similarity;
    row.cluster_id = row.election_id;
    if (!seen.emplace(row.party_id, row.election_id).second)
      throw ValidationError("duplicate panel row for " + row.party_id + " in " + row.election_id);

    const auto& dates = elections[centre.country];
    auto pos = dates.find(centre.election_date);
    std::optional<corpus::Date> prev1, prev2;
    if (pos != dates.begin()) {
      prev1 = *std::prev(pos);
      if (std::prev(pos) != dates.begin()) prev2 = *std::prev(pos, 2);
    }
    if (prev1) row.rr_support_lag1 = share_at(rr.party_id, *prev1);
    if (prev1 && prev2) {
      auto v1 = share_at(centre.party_id, *prev1);
      auto v2 = share_at(centre.party_id, *prev2);
      if (v1 && v2) row.centre_vote_diff = *v1 - *v2;
    }
    if (centre.in_government_prior) row.gov_party = *centre.in_government_prior ? 1.0 : 0.0;
    row.centre_vote_share = centre.vote_share_pct ? centre.vote_share_pct : share_at(centre.party_id, centre.election_date);
    rows.push_back(std::move(row));
  }
  std::sort(rows.begin(), rows.end(), [](const PanelRow& a, const PanelRow& b) {
    return std::tie(a.country, a.election_date, a.party_id) < std::tie(b.country, b.election_date, b.party_id);
  });
  return rows;
}

namespace {
std::string opt_cell(const std::optional<double>& v) { return v ? io::format_double(*v) : std::string(); }
}

std::string panel_csv(const std::vector<PanelRow>& panel) {
  std::string out = io::csv_row({"party_id", "election_id", "election_date", "country", "similarity",
                                 "rr_support_lag1", "centre_vote_diff", "gov_party", "centre_vote_share",
                                 "cluster_id"});
  for (const auto& r : panel) {
    out += io::csv_row({r.party_id, r.election_id, r.election_date.to_string(), r.country,
                        io::format_double(r.similarity), opt_cell(r.rr_support_lag1),
                        opt_cell(r.centre_vote_diff), opt_cell(r.gov_party), opt_cell(r.centre_vote_share),
                        r.cluster_id});
  }
  return out;
}

std::vector<PanelRow> parse_panel_csv(std::string_view content) {
  io::CsvTable table = io::parse_csv(content);
  std::map<std::string, size_t> col;
  for (size_t i = 0; i < table.header.size(); ++i) col[table.header[i]] = i;
  for (const char* name : {"party_id", "election_id", "election_date", "similarity", "rr_support_lag1",
                           "centre_vote_diff", "gov_party", "centre_vote_share", "cluster_id"})
    if (!col.count(name)) throw ValidationError(std::string("panel CSV lacks column ") + name);

  auto number = [](const std::string& cell, const std::string& where) -> std::optional<double> {
    if (cell.empty()) return std::nullopt;
    char* end = nullptr;
    double v = std::strtod(cell.c_str(), &end);
    if (end != cell.c_str() + cell.size()) throw ValidationError(where + ": non-numeric cell \"" + cell + "\"");
    return v;
  };
  std::vector<PanelRow> out;
  for (size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    std::string where = "panel line " + std::to_string(table.row_lines[r]);
    if (row.size() != table.header.size()) throw ValidationError(where + ": wrong field count");
    PanelRow p;
    p.party_id = row[col["party_id"]];
    p.election_id = row[col["election_id"]];
    auto d = corpus::Date::parse(row[col["election_date"]]);
    if (!d) throw ValidationError(where + ": bad election_date");
    p.election_date = *d;
    if (col.count("country")) p.country = row[col["country"]];
    auto sim = number(row[col["similarity"]], where);
    if (!sim) throw ValidationError(where + ": missing similarity");
    p.similarity = *sim;
    p.rr_support_lag1 = number(row[col["rr_support_lag1"]], where);
    p.centre_vote_diff = number(row[col["centre_vote_diff"]], where);
    p.gov_party = number(row[col["gov_party"]], where);
    p.centre_vote_share = number(row[col["centre_vote_share"]], where);
    p.cluster_id = row[col["cluster_id"]];
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<ModelSpec> default_specs() {
  return {
      {"(1)", {"rr_support_lag1", "gov_party", "centre_vote_share"}, true, true},
      {"(2)", {"centre_vote_diff", "gov_party", "centre_vote_share"}, true, true},
      {"(3)",
       {"rr_support_lag1", "centre_vote_diff", "rr_support_lag1:centre_vote_diff", "gov_party",
        "centre_vote_share"},
       true,
       true},
  };
}

std::optional<size_t> OlsFit::index_of(std::string_view term) const {
  for (size_t i = 0; i < terms.size(); ++i)
    if (terms[i] == term) return i;
  return std::nullopt;
}

DesignFit least_squares(const std::vector<double>& x, size_t n, size_t k, const std::vector<double>& y,
                        const std::vector<std::string>& column_names) {
  using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const Matrix> X(x.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
  Eigen::Map<const Eigen::VectorXd> Y(y.data(), static_cast<Eigen::Index>(n));

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X.rows(), X.cols());
  qr.setThreshold(1e-10);
  qr.compute(X);
  if (qr.rank() < static_cast<Eigen::Index>(k)) {
    auto dependent = qr.colsPermutation().indices()[qr.rank()];
    throw RankDeficiencyError(column_names.at(static_cast<size_t>(dependent)));
  }
  Eigen::VectorXd beta = qr.solve(Y);
  Eigen::VectorXd resid = Y - X * beta;

  // (X'X)^-1 = P R^-1 R^-T P'
  Eigen::MatrixXd R = qr.matrixR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
  Eigen::MatrixXd Rinv = R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
  Eigen::MatrixXd inner = Rinv * Rinv.transpose();
  Eigen::MatrixXd bread = qr.colsPermutation() * inner * qr.colsPermutation().transpose();

  DesignFit fit;
  fit.beta.assign(beta.data(), beta.data() + k);
  fit.residuals.assign(resid.data(), resid.data() + n);
  fit.bread.resize(k * k);
  for (size_t i = 0; i < k; ++i)
    for (size_t j = 0; j < k; ++j) fit.bread[i * k + j] = bread(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  return fit;
}

std::vector<double> cluster_robust_covariance(const std::vector<double>& x, size_t n, size_t k,
                                              const DesignFit& fit,
                                              const std::vector<std::string>& clusters) {
  std::map<std::string, Eigen::VectorXd> scores;
  for (size_t i = 0; i < n; ++i) {
    auto [it, inserted] = scores.try_emplace(clusters[i], Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k)));
    for (size_t j = 0; j < k; ++j) it->second[static_cast<Eigen::Index>(j)] += x[i * k + j] * fit.residuals[i];
  }
  const double g = static_cast<double>(scores.size());
  if (scores.size() < 2) throw ValidationError("cluster-robust errors need at least 2 clusters");
  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
  for (const auto& [id, s] : scores) meat += s * s.transpose();
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> bread(
      fit.bread.data(), static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
  const double nn = static_cast<double>(n), kk = static_cast<double>(k);
  const double factor = (g / (g - 1.0)) * ((nn - 1.0) / (nn - kk));
  Eigen::MatrixXd v = factor * (bread * meat * bread);
  std::vector<double> out(k * k);
  for (size_t i = 0; i < k; ++i)
    for (size_t j = 0; j < k; ++j) out[i * k + j] = v(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  return out;
}

OlsFit fit_ols_fe(const std::vector<PanelRow>& panel, const ModelSpec& spec) {
  for (const auto& term : spec.terms)
    for (const auto& part : split_interaction(term))
      if (!known_terms().count(part) || part == "similarity")
        throw ValidationError("unknown regressor \"" + part + "\"");

  std::vector<const PanelRow*> used;
  for (const auto& row : panel) {
    bool complete = std::all_of(spec.terms.begin(), spec.terms.end(),
                                [&](const std::string& t) { return row.value(t).has_value(); });
    if (complete) used.push_back(&row);
  }

  std::set<std::string> parties;
  std::set<std::string> clusters;
  for (const auto* r : used) {
    parties.insert(r->party_id);
    clusters.insert(r->cluster_id);
  }

  OlsFit fit;
  fit.name = spec.name;
  fit.terms.push_back("(Intercept)");
  for (const auto& t : spec.terms) fit.terms.push_back(t);
  std::vector<std::string> fe_parties;
  if (spec.party_fixed_effects && parties.size() > 1) {
    fe_parties.assign(std::next(parties.begin()), parties.end());
    for (const auto& p : fe_parties) {
      fit.terms.push_back("party[" + p + "]");
      fit.fixed_effect_terms.push_back("party[" + p + "]");
    }
  }
  const size_t n = used.size();
  const size_t k = fit.terms.size();
  fit.n_obs = n;
  fit.n_params = k;
  fit.n_clusters = clusters.size();
  if (n <= k)
    throw ValidationError("model " + spec.name + " has " + std::to_string(n) + " complete rows for " +
                          std::to_string(k) + " parameters");
  if (spec.cluster_robust && clusters.size() < 2)
    throw ValidationError("model " + spec.name + " needs at least 2 clusters");

  std::vector<double> x(n * k, 0.0), y(n);
  std::vector<std::string> cluster_of(n);
  for (size_t i = 0; i < n; ++i) {
    const PanelRow& r = *used[i];
    y[i] = r.similarity;
    cluster_of[i] = r.cluster_id;
    x[i * k] = 1.0;
    for (size_t t = 0; t < spec.terms.size(); ++t) x[i * k + 1 + t] = *r.value(spec.terms[t]);
    for (size_t p = 0; p < fe_parties.size(); ++p)
      x[i * k + 1 + spec.terms.size() + p] = r.party_id == fe_parties[p] ? 1.0 : 0.0;
  }

  DesignFit d = least_squares(x, n, k, y, fit.terms);
  fit.coefficients = d.beta;
  for (double e : d.residuals) fit.rss += e * e;
  const double nn = static_cast<double>(n), kk = static_cast<double>(k);

  std::vector<double> cov;
  if (spec.cluster_robust) {
    cov = cluster_robust_covariance(x, n, k, d, cluster_of);
  } else {
    double sigma2 = fit.rss / (nn - kk);
    cov = d.bread;
    for (double& v : cov) v *= sigma2;
  }
  const double df = spec.cluster_robust ? static_cast<double>(clusters.size()) - 1.0 : nn - kk;
  boost::math::students_t tdist(df);
  for (size_t j = 0; j < k; ++j) {
    double var = cov[j * k + j];
    double se = var > 0.0 ? std::sqrt(var) : (var == 0.0 ? 0.0 : std::nan(""));
    fit.std_errors.push_back(se);
    double p;
    if (!std::isfinite(se)) p = std::nan("");
    else if (se == 0.0) p = fit.coefficients[j] == 0.0 ? 1.0 : 0.0;
    else p = 2.0 * boost::math::cdf(boost::math::complement(tdist, std::fabs(fit.coefficients[j] / se)));
    fit.p_values.push_back(p);
  }

  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= nn;
  double tss = 0.0;
  for (double v : y) tss += (v - mean) * (v - mean);
  fit.r2 = tss > 0.0 ? 1.0 - fit.rss / tss : 0.0;
  fit.adj_r2 = 1.0 - (1.0 - fit.r2) * (nn - 1.0) / (nn - kk);
  if (k > 1) {
    double num = (tss - fit.rss) / (kk - 1.0);
    double den = fit.rss / (nn - kk);
    if (den > 0.0) {
      fit.f_stat = num / den;
      boost::math::fisher_f fdist(kk - 1.0, nn - kk);
      fit.f_p_value = fit.f_stat > 0.0 ? boost::math::cdf(boost::math::complement(fdist, fit.f_stat)) : 1.0;
    } else {
      fit.f_stat = std::numeric_limits<double>::infinity();
      fit.f_p_value = 0.0;
    }
  } else {
    fit.f_stat = std::nan("");
    fit.f_p_value = std::nan("");
  }
  return fit;
}

std::string significance_stars(double p) {
  if (!std::isfinite(p)) return "";
  if (p < 0.001) return "***";
  if (p < 0.01) return "**";
  if (p < 0.05) return "*";
  return "";
}

std::string term_label(std::string_view term) {
  static const std::map<std::string, std::string, std::less<>> labels = {
      {"rr_support_lag1", "Radical Right support (t-1)"},
      {"centre_vote_diff", "Vote difference Centre"},
      {"rr_support_lag1:centre_vote_diff", "RR support(t-1):Vote diff. Centre"},
      {"gov_party", "Government party"},
      {"centre_vote_share", "Voteshare Centre"},
      {"(Intercept)", "Constant"}};
  auto it = labels.find(term);
  return it == labels.end() ? std::string(term) : it->second;
}

namespace {

// Regressor rows in display order: known terms first, then any others,
// then the intercept.
std::vector<std::string> display_terms(const std::vector<OlsFit>& fits) {
  static const std::vector<std::string> preferred = {
      "rr_support_lag1", "centre_vote_diff", "rr_support_lag1:centre_vote_diff", "gov_party",
      "centre_vote_share"};
  std::vector<std::string> out;
  auto present = [&](const std::string& t) {
    return std::any_of(fits.begin(), fits.end(), [&](const OlsFit& f) { return f.index_of(t).has_value(); });
  };
  for (const auto& t : preferred)
    if (present(t)) out.push_back(t);
  for (const auto& f : fits)
    for (const auto& t : f.terms)
      if (t != "(Intercept)" && t.rfind("party[", 0) != 0 &&
          std::find(out.begin(), out.end(), t) == out.end())
        out.push_back(t);
  out.push_back("(Intercept)");
  return out;
}

struct Cell {
  std::string estimate;
  std::string se;
};

Cell cell_for(const OlsFit& f, const std::string& term) {
  auto idx = f.index_of(term);
  if (!idx) return {};
  double se = f.std_errors[*idx];
  Cell c;
  c.estimate = io::format_fixed(f.coefficients[*idx], 3);
  if (std::isfinite(se)) {
    c.estimate += significance_stars(f.p_values[*idx]);
    c.se = "(" + io::format_fixed(se, 3) + ")";
  }
  return c;
}

std::string pad_left(const std::string& s, size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}
std::string pad_right(const std::string& s, size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

}  // namespace

std::string report_text(const std::vector<OlsFit>& fits) {
  constexpr size_t kLabel = 36, kCol = 16;
  std::string rule(kLabel + kCol * fits.size(), '=');
  std::string out = "Pooled OLS with party fixed effects (cluster-robust standard errors in parentheses)\n";
  out += rule + "\n" + pad_right("", kLabel);
  for (const auto& f : fits) out += pad_left(f.name, kCol);
  out += "\n" + std::string(rule.size(), '-') + "\n";
  for (const auto& term : display_terms(fits)) {
    std::string est_line = pad_right(term_label(term), kLabel);
    std::string se_line = pad_right("", kLabel);
    for (const auto& f : fits) {
      Cell c = cell_for(f, term);
      est_line += pad_left(c.estimate, kCol);
      se_line += pad_left(c.se, kCol);
    }
    out += est_line + "\n" + se_line + "\n";
  }
  std::string fe = pad_right("Party fixed effects", kLabel);
  for (const auto& f : fits) fe += pad_left(f.fixed_effect_terms.empty() ? "No" : "Yes", kCol);
  out += fe + "\n" + std::string(rule.size(), '-') + "\n";

  auto stat_row = [&](const std::string& label, auto format) {
    std::string line = pad_right(label, kLabel);
    for (const auto& f : fits) line += pad_left(format(f), kCol);
    out += line + "\n";
  };
  stat_row("Observations", [](const OlsFit& f) { return std::to_string(f.n_obs); });
  stat_row("Clusters (elections)", [](const OlsFit& f) { return std::to_string(f.n_clusters); });
  stat_row("R2", [](const OlsFit& f) { return io::format_fixed(f.r2, 3); });
  stat_row("Adjusted R2", [](const OlsFit& f) { return io::format_fixed(f.adj_r2, 3); });
  stat_row("F Statistic (classical)", [](const OlsFit& f) {
    return io::format_fixed(f.f_stat, 3) + significance_stars(f.f_p_value);
  });
  out += rule + "\n";
  out += "Note: *p<0.05; **p<0.01; ***p<0.001\n";
  return out;
}

std::string report_csv(const std::vector<OlsFit>& fits) {
  std::vector<std::string> header = {"term", "statistic"};
  for (const auto& f : fits) header.push_back(f.name);
  std::string out = io::csv_row(header);
  for (const auto& term : display_terms(fits)) {
    std::vector<std::string> est = {term, "estimate"};
    std::vector<std::string> se = {term, "std_error"};
    std::vector<std::string> p = {term, "p_value"};
    for (const auto& f : fits) {
      auto idx = f.index_of(term);
      est.push_back(idx ? io::format_double(f.coefficients[*idx]) : "");
      se.push_back(idx && std::isfinite(f.std_errors[*idx]) ? io::format_double(f.std_errors[*idx]) : "");
      p.push_back(idx && std::isfinite(f.p_values[*idx]) ? io::format_double(f.p_values[*idx]) : "");
    }
    out += io::csv_row(est) + io::csv_row(se) + io::csv_row(p);
  }
  auto stat = [&](const std::string& name, auto format) {
    std::vector<std::string> row = {name, ""};
    for (const auto& f : fits) row.push_back(format(f));
    out += io::csv_row(row);
  };
  stat("n_obs", [](const OlsFit& f) { return std::to_string(f.n_obs); });
  stat("n_clusters", [](const OlsFit& f) { return std::to_string(f.n_clusters); });
  stat("r2", [](const OlsFit& f) { return io::format_double(f.r2); });
  stat("adj_r2", [](const OlsFit& f) { return io::format_double(f.adj_r2); });
  stat("f_stat_classical", [](const OlsFit& f) { return io::format_double(f.f_stat); });
  stat("f_p_value", [](const OlsFit& f) { return io::format_double(f.f_p_value); });
  return out;
}

}  // namespace groupscope::econ
