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

#ifndef GROUPSCOPE_METRICS_HPP_
#define GROUPSCOPE_METRICS_HPP_

#include <map>
#include <string>
#include <vector>

#include "groupscope/corpus.hpp"
#include "groupscope/error.hpp"
#include "groupscope/lexicon.hpp"

namespace groupscope::metrics {

struct SalienceProfile {
  std::string doc_id;
  size_t total_sentences = 0;
  size_t denominator_sentences = 0;       // sentences with at least one mention
  std::map<std::string, size_t> counts;   // group -> sentences mentioning it
  std::map<std::string, double> raw_salience;
  std::map<std::string, double> share;
  bool empty = true;
};

SalienceProfile salience(const std::vector<lexicon::GroupMention>& mentions,
                         const std::vector<corpus::Sentence>& sentences);

enum class SimilarityMode { share_renormalized, raw_sentence };
std::string_view to_string(SimilarityMode m);
std::optional<SimilarityMode> parse_similarity_mode(std::string_view s);

class UndefinedSimilarityError : public ValidationError {
 public:
  UndefinedSimilarityError(const std::string& a, const std::string& b);
  std::string doc_a;
  std::string doc_b;
};

struct SimilarityRecord {
  std::string election_id;
  std::string centre_doc_id;
  std::string rr_doc_id;
  double dissimilarity = 0.0;
  double similarity = 100.0;
  SimilarityMode mode = SimilarityMode::share_renormalized;
  bool clamped = false;  // raw mode only
};

// Half the L1 distance between the two salience vectors, as 0..100 similarity.
SimilarityRecord similarity(const SalienceProfile& a, const SalienceProfile& b,
                            SimilarityMode mode = SimilarityMode::share_renormalized);

enum class Direction { target_typical, reference_typical };
std::string_view to_string(Direction d);

struct KeynessRow {
  std::string group_id;
  double target_count = 0;
  double target_total = 0;
  double reference_count = 0;
  double reference_total = 0;
  double g2 = 0.0;  // positive when target-typical
  Direction direction = Direction::target_typical;

  double target_rel_freq() const { return target_count / target_total; }
  double reference_rel_freq() const { return reference_count / reference_total; }
};

// Log-likelihood G2 of one 2x2 table; zero cells contribute nothing.
double log_likelihood_g2(double target_count, double target_total, double reference_count,
                         double reference_total);

// Totals are the sums of the count maps. Groups with zero counts on both
// sides are dropped. Rows sorted by descending |G2|, then group_id.
std::vector<KeynessRow> keyness(const std::map<std::string, double>& target,
                                const std::map<std::string, double>& reference);

// Output formats.
std::string salience_csv(const std::vector<SalienceProfile>& profiles);

struct SimilarityRow {
  SimilarityRecord record;
  std::string centre_party_id;
  std::string rr_party_id;
  std::string family;
};
std::string similarity_csv(const std::vector<SimilarityRow>& rows);
std::string keyness_csv(const std::vector<KeynessRow>& rows);

}  // namespace groupscope::metrics

#endif  // GROUPSCOPE_METRICS_HPP_
