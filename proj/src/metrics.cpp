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

#include "groupscope/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "groupscope/io.hpp"

namespace groupscope::metrics {

SalienceProfile salience(const std::vector<lexicon::GroupMention>& mentions,
                         const std::vector<corpus::Sentence>& sentences) {
  SalienceProfile p;
  std::set<std::string> known;
  for (const auto& s : sentences) {
    if (p.doc_id.empty()) p.doc_id = s.doc_id;
    else if (s.doc_id != p.doc_id)
      throw ValidationError("salience expects sentences of one document, got " + p.doc_id + " and " + s.doc_id);
    known.insert(s.sentence_id);
  }
  p.total_sentences = sentences.size();

  std::set<std::pair<std::string, std::string>> sentence_groups;
  std::set<std::string> mentioning;
  for (const auto& m : mentions) {
    if (!known.count(m.sentence_id))
      throw ValidationError("mention references sentence " + m.sentence_id + " outside document " + p.doc_id);
    sentence_groups.emplace(m.sentence_id, m.group_id);
    mentioning.insert(m.sentence_id);
  }
  for (const auto& [sid, group] : sentence_groups) ++p.counts[group];
  p.denominator_sentences = mentioning.size();
  if (p.denominator_sentences == 0) return p;

  p.empty = false;
  size_t total = sentence_groups.size();
  for (const auto& [group, n] : p.counts) {
    p.raw_salience[group] = static_cast<double>(n) / static_cast<double>(p.denominator_sentences);
    p.share[group] = static_cast<double>(n) / static_cast<double>(total);
  }
  return p;
}

std::string_view to_string(SimilarityMode m) {
  return m == SimilarityMode::share_renormalized ? "share_renormalized" : "raw_sentence";
}

std::optional<SimilarityMode> parse_similarity_mode(std::string_view s) {
  if (s == "share_renormalized" || s == "share") return SimilarityMode::share_renormalized;
  if (s == "raw_sentence" || s == "raw") return SimilarityMode::raw_sentence;
  return std::nullopt;
}

UndefinedSimilarityError::UndefinedSimilarityError(const std::string& a, const std::string& b)
    : ValidationError("similarity undefined: profile " + a + " or " + b + " has no group mentions"),
      doc_a(a),
      doc_b(b) {}

SimilarityRecord similarity(const SalienceProfile& a, const SalienceProfile& b, SimilarityMode mode) {
  if (a.empty || b.empty || a.denominator_sentences == 0 || b.denominator_sentences == 0)
    throw UndefinedSimilarityError(a.doc_id, b.doc_id);
  const auto& va = mode == SimilarityMode::share_renormalized ? a.share : a.raw_salience;
  const auto& vb = mode == SimilarityMode::share_renormalized ? b.share : b.raw_salience;

  std::set<std::string> groups;
  for (const auto& [g, v] : va) groups.insert(g);
  for (const auto& [g, v] : vb) groups.insert(g);
  double sum = 0.0;
  bool overlap = false;
  for (const auto& g : groups) {
    auto ia = va.find(g);
    auto ib = vb.find(g);
    double x = ia == va.end() ? 0.0 : ia->second;
    double y = ib == vb.end() ? 0.0 : ib->second;
    sum += std::fabs(x - y);
    overlap = overlap || (x > 0.0 && y > 0.0);
  }
  SimilarityRecord r;
  r.centre_doc_id = a.doc_id;
  r.rr_doc_id = b.doc_id;
  r.mode = mode;
  double d = sum / 2.0;
  // Shares on disjoint supports are exactly one apart.
  if (mode == SimilarityMode::share_renormalized && !overlap) d = 1.0;
  if (d > 1.0) {
    // Raw saliences can sum past 1 when sentences name several groups; share
    // mode only reaches here through rounding.
    r.clamped = mode == SimilarityMode::raw_sentence;
    d = 1.0;
  }
  r.dissimilarity = d;
  r.similarity = 100.0 * (1.0 - d);
  return r;
}

std::string_view to_string(Direction d) {
  return d == Direction::target_typical ? "target_typical" : "reference_typical";
}

double log_likelihood_g2(double a, double target_total, double b, double reference_total) {
  if (!(target_total > 0.0) || !(reference_total > 0.0))
    throw ValidationError("keyness needs positive totals on both sides");
  if (a < 0 || b < 0 || a > target_total || b > reference_total)
    throw ValidationError("keyness counts must lie within [0, total]");
  const double c = target_total - a;
  const double d = reference_total - b;
  const double n = target_total + reference_total;
  const double observed[4] = {a, b, c, d};
  const double expected[4] = {(a + b) * target_total / n, (a + b) * reference_total / n,
                              (c + d) * target_total / n, (c + d) * reference_total / n};
  double terms[4];
  for (int i = 0; i < 4; ++i)
    terms[i] = observed[i] > 0.0 ? observed[i] * std::log(observed[i] / expected[i]) : 0.0;
  // Summing in sorted order makes the result independent of which side is
  // called the target.
  std::sort(std::begin(terms), std::end(terms));
  double g2 = 2.0 * (((terms[0] + terms[1]) + terms[2]) + terms[3]);
  return g2 < 0.0 ? 0.0 : g2;
}

std::vector<KeynessRow> keyness(const std::map<std::string, double>& target,
                                const std::map<std::string, double>& reference) {
  double target_total = 0.0, reference_total = 0.0;
  for (const auto& [g, n] : target) target_total += n;
  for (const auto& [g, n] : reference) reference_total += n;
  if (!(target_total > 0.0) || !(reference_total > 0.0))
    throw ValidationError("keyness needs positive totals on both sides");

  std::set<std::string> groups;
  for (const auto& [g, n] : target) if (n > 0) groups.insert(g);
  for (const auto& [g, n] : reference) if (n > 0) groups.insert(g);

  std::vector<KeynessRow> rows;
  for (const auto& g : groups) {
    KeynessRow r;
    r.group_id = g;
    auto it = target.find(g);
    auto ir = reference.find(g);
    r.target_count = it == target.end() ? 0.0 : it->second;
    r.reference_count = ir == reference.end() ? 0.0 : ir->second;
    r.target_total = target_total;
    r.reference_total = reference_total;
    double g2 = log_likelihood_g2(r.target_count, target_total, r.reference_count, reference_total);
    // Cross-multiplied comparison avoids rounding in the two quotients.
    bool target_side = r.target_count * reference_total >= r.reference_count * target_total;
    r.direction = target_side ? Direction::target_typical : Direction::reference_typical;
    r.g2 = target_side ? g2 : -g2;
    rows.push_back(r);
  }
  std::sort(rows.begin(), rows.end(), [](const KeynessRow& x, const KeynessRow& y) {
    double ax = std::fabs(x.g2), ay = std::fabs(y.g2);
    if (ax != ay) return ax > ay;
    return x.group_id < y.group_id;
  });
  return rows;
}

std::string salience_csv(const std::vector<SalienceProfile>& profiles) {
  std::string out = io::csv_row({"doc_id", "group_id", "raw_salience", "share"});
  for (const auto& p : profiles)
    for (const auto& [g, raw] : p.raw_salience)
      out += io::csv_row({p.doc_id, g, io::format_double(raw), io::format_double(p.share.at(g))});
  return out;
}

std::string similarity_csv(const std::vector<SimilarityRow>& rows) {
  std::string out = io::csv_row({"election_id", "centre_party_id", "rr_party_id", "family", "similarity"});
  for (const auto& r : rows)
    out += io::csv_row({r.record.election_id, r.centre_party_id, r.rr_party_id, r.family,
                        io::format_double(r.record.similarity)});
  return out;
}

std::string keyness_csv(const std::vector<KeynessRow>& rows) {
  std::string out = io::csv_row({"group_id", "g2", "direction", "target_rel_freq", "reference_rel_freq"});
  for (const auto& r : rows)
    out += io::csv_row({r.group_id, io::format_double(r.g2), std::string(to_string(r.direction)),
                        io::format_double(r.target_rel_freq()), io::format_double(r.reference_rel_freq())});
  return out;
}

}  // namespace groupscope::metrics
