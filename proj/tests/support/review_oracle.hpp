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

#ifndef GROUPSCOPE_TEST_REVIEW_ORACLE_HPP_
#define GROUPSCOPE_TEST_REVIEW_ORACLE_HPP_

// Offline counterpart of a review recompute: replay the journal, refit the
// model on the expanded whitelist, rank pending candidates by hand.

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <limits>

#include "groupscope/esf.hpp"
#include "groupscope/io.hpp"
#include "groupscope/pipeline.hpp"
#include "groupscope/text.hpp"
#include "support.hpp"

namespace oracle {

struct OfflineRefit {
  groupscope::lexicon::GroupLexicon lexicon;
  groupscope::esf::EsfModel model;
  std::vector<std::string> pending_order;
};

inline OfflineRefit offline_refit(const groupscope::pipeline::PipelineConfig& config) {
  namespace pl = groupscope::pipeline;
  namespace lx = groupscope::lexicon;
  using nlohmann::json;
  OfflineRefit out;
  auto seed = lx::load_lexicon(config.lexicon_path);
  auto journal = lx::load_journal(config.journal_path);
  out.lexicon = lx::replay(seed, journal);

  auto store = groupscope::embed::parse_store(testing::slurp(config.output_dir / pl::artifact::embeddings));
  std::string backend =
      json::parse(testing::slurp(config.output_dir / pl::artifact::embeddings_meta))["backend_id"];
  out.model = groupscope::esf::fit(pl::whitelist_embeddings(out.lexicon, store, backend), config.esf);

  const std::string mode(groupscope::esf::to_string(config.esf_mode));
  std::vector<std::pair<double, std::string>> ranked;
  for (const auto& line :
       groupscope::io::split_lines(testing::slurp(config.output_dir / pl::artifact::candidates_filtered))) {
    if (line.empty()) continue;
    auto c = json::parse(line);
    if (!c["verdicts"][mode]["accepted"].get<bool>()) continue;
    const std::string lang = c["language"], phrase = c["surface_phrase"];
    if (seed.owner(lang, phrase)) continue;
    bool decided = std::any_of(journal.begin(), journal.end(), [&](const lx::ExpansionEvent& e) {
      return e.language == lang && groupscope::text::normalize(e.surface_phrase) == phrase;
    });
    if (decided) continue;
    double d = std::numeric_limits<double>::infinity();
    if (const auto* v = store.find(phrase)) {
      double s = 0.0;
      for (size_t i = 0; i < v->size(); ++i) s += ((*v)[i] - out.model.center[i]) * ((*v)[i] - out.model.center[i]);
      d = std::sqrt(s);
    }
    ranked.emplace_back(d, c["candidate_id"].get<std::string>());
  }
  std::sort(ranked.begin(), ranked.end());
  for (const auto& [d, id] : ranked) out.pending_order.push_back(id);
  return out;
}

}  // namespace oracle

#endif  // GROUPSCOPE_TEST_REVIEW_ORACLE_HPP_
