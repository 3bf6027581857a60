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

#include "groupscope/evalkit.hpp"

#include <json.hpp>

#include "groupscope/io.hpp"

namespace groupscope::eval {

using nlohmann::json;
using nlohmann::ordered_json;

void validate(const GoldLabel& label) {
  if (label.sentence_id.empty()) throw ValidationError("gold label without sentence_id");
  if (!label.has_group && (!label.groups.empty() || label.extra_group))
    throw ValidationError("gold label " + label.sentence_id + " has groups but has_group is false");
}

std::vector<GoldLabel> parse_gold_jsonl(std::string_view content) {
  std::vector<GoldLabel> out;
  auto lines = io::split_lines(content);
  for (size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].find_first_not_of(" \t") == std::string::npos) continue;
    std::string where = "gold line " + std::to_string(i + 1);
    json j = json::parse(lines[i], nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw ValidationError(where + ": not a JSON object");
    try {
      GoldLabel g;
      g.sentence_id = j.at("sentence_id").get<std::string>();
      g.has_group = j.at("has_group").get<bool>();
      if (j.contains("groups"))
        for (const auto& v : j.at("groups")) g.groups.insert(v.get<std::string>());
      g.extra_group = j.value("extra_group", false);
      validate(g);
      out.push_back(std::move(g));
    } catch (const json::exception& e) {
      throw ValidationError(where + ": " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    }
  }
  return out;
}

std::vector<GoldLabel> load_gold(const std::filesystem::path& path) {
  return parse_gold_jsonl(io::read_file(path));
}

std::string gold_to_jsonl(const std::vector<GoldLabel>& labels) {
  std::string out;
  for (const auto& g : labels) {
    ordered_json j;
    j["sentence_id"] = g.sentence_id;
    j["has_group"] = g.has_group;
    j["groups"] = g.groups;
    j["extra_group"] = g.extra_group;
    out += j.dump() + "\n";
  }
  return out;
}

std::string_view to_string(Granularity g) { return g == Granularity::binary ? "binary" : "per_group"; }

std::optional<Granularity> parse_granularity(std::string_view s) {
  if (s == "binary") return Granularity::binary;
  if (s == "per_group") return Granularity::per_group;
  return std::nullopt;
}

ClassScores scores_from_counts(size_t tp, size_t fp, size_t fn) {
  ClassScores c;
  c.tp = tp;
  c.fp = fp;
  c.fn = fn;
  c.support = tp + fn;
  auto ratio = [&](size_t num, size_t den) {
    if (den == 0) {
      c.zero_division = true;
      return 0.0;
    }
    return static_cast<double>(num) / static_cast<double>(den);
  };
  c.precision = ratio(tp, tp + fp);
  c.recall = ratio(tp, tp + fn);
  if (c.precision + c.recall > 0.0) {
    c.f1 = 2.0 * c.precision * c.recall / (c.precision + c.recall);
  } else {
    c.f1 = 0.0;
    if (tp + fp + fn > 0) c.zero_division = c.zero_division || tp == 0;
  }
  return c;
}

EvalReport score_detection(const std::map<std::string, std::set<std::string>>& predictions,
                           const std::vector<GoldLabel>& gold, Granularity granularity) {
  std::vector<std::string> missing;
  for (const auto& g : gold) {
    validate(g);
    if (!predictions.count(g.sentence_id)) missing.push_back(g.sentence_id);
  }
  if (!missing.empty()) {
    std::string list;
    for (size_t i = 0; i < missing.size(); ++i) list += (i ? ", " : "") + missing[i];
    throw ValidationError("no prediction for gold sentences: " + list);
  }

  struct Counts {
    size_t tp = 0, fp = 0, fn = 0;
  };
  std::map<std::string, Counts> counts;
  for (const auto& g : gold) {
    const auto& pred = predictions.at(g.sentence_id);
    if (granularity == Granularity::binary) {
      const std::string truth = g.has_group ? "group" : "no_group";
      const std::string guess = pred.empty() ? "no_group" : "group";
      counts["group"];
      counts["no_group"];
      if (truth == guess) {
        ++counts[truth].tp;
      } else {
        ++counts[guess].fp;
        ++counts[truth].fn;
      }
    } else {
      for (const auto& p : pred) {
        if (g.groups.count(p)) ++counts[p].tp;
        else ++counts[p].fp;
      }
      for (const auto& t : g.groups)
        if (!pred.count(t)) ++counts[t].fn;
    }
  }

  EvalReport r;
  r.granularity = granularity;
  r.n_sentences = gold.size();
  for (const auto& [cls, c] : counts) {
    r.per_class[cls] = scores_from_counts(c.tp, c.fp, c.fn);
    r.total_tp += c.tp;
    r.total_fp += c.fp;
    r.total_fn += c.fn;
  }
  ClassScores micro = scores_from_counts(r.total_tp, r.total_fp, r.total_fn);
  r.micro_precision = micro.precision;
  r.micro_recall = micro.recall;
  r.micro_f1 = micro.f1;
  for (const auto& [cls, s] : r.per_class) {
    if (s.support == 0) continue;
    ++r.macro_classes;
    r.macro_precision += s.precision;
    r.macro_recall += s.recall;
    r.macro_f1 += s.f1;
  }
  if (r.macro_classes > 0) {
    const double n = static_cast<double>(r.macro_classes);
    r.macro_precision /= n;
    r.macro_recall /= n;
    r.macro_f1 /= n;
  }
  return r;
}

std::string report_json(const EvalReport& r) {
  ordered_json j;
  j["granularity"] = std::string(to_string(r.granularity));
  j["n_sentences"] = r.n_sentences;
  ordered_json classes = ordered_json::object();
  for (const auto& [cls, s] : r.per_class) {
    classes[cls] = {{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1},
                    {"support", s.support},     {"tp", s.tp},         {"fp", s.fp},
                    {"fn", s.fn},               {"zero_division", s.zero_division}};
  }
  j["per_class"] = classes;
  j["micro"] = {{"precision", r.micro_precision}, {"recall", r.micro_recall}, {"f1", r.micro_f1}};
  j["macro"] = {{"precision", r.macro_precision}, {"recall", r.macro_recall}, {"f1", r.macro_f1},
                {"classes", r.macro_classes}};
  j["totals"] = {{"tp", r.total_tp}, {"fp", r.total_fp}, {"fn", r.total_fn}};
  return j.dump(2) + "\n";
}

std::string report_text(const EvalReport& r) {
  auto pad = [](std::string s, size_t w) { return s.size() >= w ? s : std::string(w - s.size(), ' ') + s; };
  std::string out = "Detection scores (" + std::string(to_string(r.granularity)) + ", " +
                    std::to_string(r.n_sentences) + " sentences)\n";
  out += pad("class", 28) + pad("precision", 11) + pad("recall", 9) + pad("f1", 9) + pad("support", 9) + "\n";
  for (const auto& [cls, s] : r.per_class) {
    out += pad(cls, 28) + pad(io::format_fixed(s.precision, 3), 11) + pad(io::format_fixed(s.recall, 3), 9) +
           pad(io::format_fixed(s.f1, 3), 9) + pad(std::to_string(s.support), 9) +
           (s.zero_division ? "  (zero division)" : "") + "\n";
  }
  out += pad("micro", 28) + pad(io::format_fixed(r.micro_precision, 3), 11) +
         pad(io::format_fixed(r.micro_recall, 3), 9) + pad(io::format_fixed(r.micro_f1, 3), 9) + "\n";
  out += pad("macro", 28) + pad(io::format_fixed(r.macro_precision, 3), 11) +
         pad(io::format_fixed(r.macro_recall, 3), 9) + pad(io::format_fixed(r.macro_f1, 3), 9) + "\n";
  return out;
}

}  // namespace groupscope::eval
