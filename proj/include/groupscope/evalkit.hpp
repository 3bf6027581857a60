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

#ifndef GROUPSCOPE_EVALKIT_HPP_
#define GROUPSCOPE_EVALKIT_HPP_

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "groupscope/error.hpp"

namespace groupscope::eval {

struct GoldLabel {
  std::string sentence_id;
  bool has_group = false;
  std::set<std::string> groups;
  bool extra_group = false;  // a group outside the lexicon
};

void validate(const GoldLabel& label);

std::vector<GoldLabel> parse_gold_jsonl(std::string_view content);
std::vector<GoldLabel> load_gold(const std::filesystem::path& path);
std::string gold_to_jsonl(const std::vector<GoldLabel>& labels);

enum class Granularity { binary, per_group };
std::string_view to_string(Granularity g);
std::optional<Granularity> parse_granularity(std::string_view s);

struct ClassScores {
  size_t tp = 0;
  size_t fp = 0;
  size_t fn = 0;
  size_t support = 0;  // tp + fn
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool zero_division = false;  // some ratio had a zero denominator and was set to 0
};

struct EvalReport {
  Granularity granularity = Granularity::binary;
  std::map<std::string, ClassScores> per_class;
  double micro_precision = 0.0;
  double micro_recall = 0.0;
  double micro_f1 = 0.0;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  size_t macro_classes = 0;  // classes with nonzero support
  size_t total_tp = 0;
  size_t total_fp = 0;
  size_t total_fn = 0;
  size_t n_sentences = 0;
};

// Binary scores the classes "group" and "no_group" from set emptiness;
// per_group scores each group as its own label. Throws ValidationError
// naming gold sentences without a prediction.
EvalReport score_detection(const std::map<std::string, std::set<std::string>>& predictions,
                           const std::vector<GoldLabel>& gold, Granularity granularity);

// Precision, recall and F1 from counts, with the zero-division convention.
ClassScores scores_from_counts(size_t tp, size_t fp, size_t fn);

std::string report_json(const EvalReport& report);
std::string report_text(const EvalReport& report);

}  // namespace groupscope::eval

#endif  // GROUPSCOPE_EVALKIT_HPP_
