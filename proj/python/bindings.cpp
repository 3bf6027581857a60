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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <json.hpp>

#include "groupscope/corpus.hpp"
#include "groupscope/econometrics.hpp"
#include "groupscope/embed.hpp"
#include "groupscope/error.hpp"
#include "groupscope/esf.hpp"
#include "groupscope/evalkit.hpp"
#include "groupscope/io.hpp"
#include "groupscope/lexicon.hpp"
#include "groupscope/llm.hpp"
#include "groupscope/metrics.hpp"
#include "groupscope/pipeline.hpp"
#include "groupscope/text.hpp"

namespace py = pybind11;
namespace gs = groupscope;

namespace {

py::object json_to_py(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

gs::lexicon::GroupLexicon apply_event(const gs::lexicon::GroupLexicon& lex, const std::string& phrase,
                                      const std::string& language, gs::lexicon::Decision decision,
                                      const std::string& target, const std::string& reviewer) {
  gs::lexicon::ExpansionEvent ev;
  ev.event_id = lex.journal.empty() ? 1 : lex.journal.back().event_id + 1;
  ev.timestamp = gs::io::utc_timestamp();
  ev.surface_phrase = phrase;
  ev.language = language;
  ev.decision = decision;
  ev.target_group_id = target;
  ev.reviewer = reviewer;
  return gs::lexicon::apply_expansion(lex, ev);
}

py::dict ols_to_dict(const gs::econ::OlsFit& f) {
  py::dict d;
  d["name"] = f.name;
  d["terms"] = f.terms;
  d["coefficients"] = f.coefficients;
  d["std_errors"] = f.std_errors;
  d["p_values"] = f.p_values;
  d["r2"] = f.r2;
  d["adj_r2"] = f.adj_r2;
  d["f_stat"] = f.f_stat;
  d["n_obs"] = f.n_obs;
  d["n_clusters"] = f.n_clusters;
  return d;
}

std::optional<double> optional_number(const py::dict& row, const char* key) {
  if (!row.contains(key) || row[key].is_none()) return std::nullopt;
  return row[key].cast<double>();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of groupscope";
  m.attr("__version__") = "0.3.0";

  static py::exception<gs::Error> base(m, "GroupscopeError", PyExc_RuntimeError);
  static py::exception<gs::ValidationError> validation(m, "ValidationError", base.ptr());
  static py::exception<gs::DependencyError> dependency(m, "DependencyError", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const gs::ValidationError& e) {
      py::set_error(validation, e.what());
    } catch (const gs::DependencyError& e) {
      py::set_error(dependency, e.what());
    } catch (const gs::Error& e) {
      py::set_error(base, e.what());
    }
  });

  m.def("normalize", &gs::text::normalize, py::arg("text"),
        "Lowercase, NFC and collapsed white space.");
  m.def(
      "split_sentences",
      [](const std::string& text, const std::string& language) { return gs::corpus::split_text(text, language); },
      py::arg("text"), py::arg("language"));

  py::class_<gs::lexicon::GroupLexicon>(m, "Lexicon")
      .def_static("load", [](const std::filesystem::path& p) { return gs::lexicon::load_lexicon(p); })
      .def_static("from_json", [](const std::string& s) { return gs::lexicon::parse_lexicon(s); })
      .def_static(
          "replay",
          [](const gs::lexicon::GroupLexicon& seed, const std::string& journal_jsonl) {
            return gs::lexicon::replay(seed, gs::lexicon::parse_journal(journal_jsonl));
          },
          py::arg("seed"), py::arg("journal_jsonl"))
      .def_readonly("version", &gs::lexicon::GroupLexicon::version)
      .def("group_ids",
           [](const gs::lexicon::GroupLexicon& l) {
             std::vector<std::string> ids;
             for (const auto& [id, e] : l.entries) ids.push_back(id);
             return ids;
           })
      .def("synonyms",
           [](const gs::lexicon::GroupLexicon& l, const std::string& group_id, const std::string& language) {
             auto it = l.entries.find(group_id);
             if (it == l.entries.end()) throw py::key_error(group_id);
             auto s = it->second.synonyms.find(language);
             return s == it->second.synonyms.end() ? std::set<std::string>{} : s->second;
           })
      .def("owner", &gs::lexicon::GroupLexicon::owner, py::arg("language"), py::arg("normalized"))
      .def("to_json", &gs::lexicon::serialize_lexicon)
      .def("journal_jsonl", [](const gs::lexicon::GroupLexicon& l) { return gs::lexicon::serialize_journal(l.journal); })
      .def(
          "match",
          [](const gs::lexicon::GroupLexicon& l, const std::string& text, const std::string& language,
             const std::string& sentence_id) {
            gs::corpus::Sentence s{sentence_id, "", 0, text};
            py::list out;
            for (const auto& mention : gs::lexicon::match(s, l, language)) {
              py::dict d;
              d["group_id"] = mention.group_id;
              d["matched_surface"] = mention.matched_surface;
              d["start"] = mention.start;
              d["end"] = mention.end;
              out.append(d);
            }
            return out;
          },
          py::arg("text"), py::arg("language"), py::arg("sentence_id") = "s")
      .def(
          "accept_as_synonym",
          [](const gs::lexicon::GroupLexicon& l, const std::string& phrase, const std::string& language,
             const std::string& target, const std::string& reviewer) {
            return apply_event(l, phrase, language, gs::lexicon::Decision::accept_as_synonym, target, reviewer);
          },
          py::arg("phrase"), py::arg("language"), py::arg("target_group_id"), py::arg("reviewer") = "python")
      .def(
          "accept_as_new_group",
          [](const gs::lexicon::GroupLexicon& l, const std::string& phrase, const std::string& language,
             const std::string& group_id, const std::string& reviewer) {
            return apply_event(l, phrase, language, gs::lexicon::Decision::accept_as_new_group, group_id, reviewer);
          },
          py::arg("phrase"), py::arg("language"), py::arg("group_id") = "", py::arg("reviewer") = "python")
      .def(
          "reject",
          [](const gs::lexicon::GroupLexicon& l, const std::string& phrase, const std::string& language,
             const std::string& reviewer) {
            return apply_event(l, phrase, language, gs::lexicon::Decision::reject, "", reviewer);
          },
          py::arg("phrase"), py::arg("language"), py::arg("reviewer") = "python")
      .def("__eq__", [](const gs::lexicon::GroupLexicon& a, const gs::lexicon::GroupLexicon& b) { return a == b; });

  m.def("parse_response", [](const std::string& raw) {
    auto r = gs::llm::parse_response(raw);
    py::dict d;
    d["ok"] = r.ok;
    d["explicit"] = r.fields.explicit_groups;
    d["implicit"] = r.fields.implicit_groups;
    d["others"] = r.fields.others;
    d["salvage_applied"] = r.salvage_applied;
    d["warnings"] = r.warnings;
    d["error"] = r.error;
    return d;
  });

  m.def(
      "fit_center",
      [](const std::vector<std::vector<double>>& points) {
        auto c = gs::esf::fit_center(points);
        py::dict d;
        d["center"] = c.center;
        d["radius_avg"] = c.radius_avg;
        d["d_max"] = c.d_max;
        return d;
      },
      py::arg("points"));

  m.def(
      "fit_ocsvm",
      [](const std::vector<std::vector<double>>& points, double nu, const std::string& kernel,
         std::optional<double> gamma) {
        auto k = gs::esf::parse_kernel(kernel);
        if (!k) throw gs::ValidationError("kernel must be linear or rbf");
        gs::esf::Kernel kern{*k, gamma ? *gamma : (*k == gs::esf::KernelType::rbf
                                                      ? gs::esf::median_heuristic_gamma(points)
                                                      : 1.0)};
        auto model = gs::esf::fit_ocsvm(points, nu, kern);
        py::dict d;
        d["alphas"] = model.alphas;
        d["rho"] = model.rho;
        d["support_indices"] = model.support_indices;
        d["iterations"] = model.iterations;
        d["gamma"] = kern.gamma;
        return d;
      },
      py::arg("points"), py::arg("nu") = 0.1, py::arg("kernel") = "rbf", py::arg("gamma") = py::none());

  py::class_<gs::esf::EsfModel>(m, "EsfModel")
      .def_readonly("center", &gs::esf::EsfModel::center)
      .def_readonly("radius_avg", &gs::esf::EsfModel::radius_avg)
      .def_readonly("d_max", &gs::esf::EsfModel::d_max)
      .def_readonly("n_whitelist", &gs::esf::EsfModel::n_whitelist)
      .def("digest", &gs::esf::EsfModel::digest)
      .def("distance", &gs::esf::EsfModel::distance_to_center, py::arg("vector"))
      .def(
          "classify",
          [](const gs::esf::EsfModel& model, const std::vector<double>& x, const std::string& mode) {
            auto md = gs::esf::parse_mode(mode);
            if (!md) throw gs::ValidationError("mode must be avg_radius, max_radius or ocsvm");
            auto v = gs::esf::classify(x, model, *md);
            return py::make_tuple(v.accepted, v.score);
          },
          py::arg("vector"), py::arg("mode") = "avg_radius")
      .def("to_json", [](const gs::esf::EsfModel& model) { return gs::esf::serialize_model(model); });

  m.def(
      "esf_fit",
      [](const std::vector<std::vector<double>>& vectors, std::vector<std::string> phrases, const std::string& metric,
         double nu, const std::string& kernel, std::optional<double> gamma) {
        gs::esf::EsfOptions opts;
        auto mt = gs::esf::parse_metric(metric);
        auto kt = gs::esf::parse_kernel(kernel);
        if (!mt || !kt) throw gs::ValidationError("unknown metric or kernel");
        opts.metric = *mt;
        opts.kernel = *kt;
        opts.nu = nu;
        opts.gamma = gamma;
        if (phrases.empty())
          for (size_t i = 0; i < vectors.size(); ++i) phrases.push_back("p" + std::to_string(i));
        if (phrases.size() != vectors.size()) throw gs::ValidationError("phrases and vectors differ in length");
        std::vector<gs::embed::EmbeddingVector> whitelist;
        for (size_t i = 0; i < vectors.size(); ++i) whitelist.push_back({phrases[i], vectors[i], "python"});
        return gs::esf::fit(whitelist, opts);
      },
      py::arg("vectors"), py::arg("phrases") = std::vector<std::string>{}, py::arg("metric") = "euclidean",
      py::arg("nu") = 0.1, py::arg("kernel") = "rbf", py::arg("gamma") = py::none());

  m.def(
      "similarity",
      [](const std::map<std::string, double>& a, const std::map<std::string, double>& b, const std::string& mode) {
        auto md = gs::metrics::parse_similarity_mode(mode);
        if (!md) throw gs::ValidationError("mode must be share_renormalized or raw_sentence");
        auto profile = [](const std::map<std::string, double>& v, const char* id) {
          gs::metrics::SalienceProfile p;
          p.doc_id = id;
          p.share = v;
          p.raw_salience = v;
          p.denominator_sentences = v.empty() ? 0 : 1;
          p.empty = v.empty();
          return p;
        };
        return gs::metrics::similarity(profile(a, "a"), profile(b, "b"), *md).similarity;
      },
      py::arg("a"), py::arg("b"), py::arg("mode") = "share_renormalized",
      "100 * (1 - half the L1 distance) between two salience vectors.");

  m.def("log_likelihood_g2", &gs::metrics::log_likelihood_g2, py::arg("target_count"), py::arg("target_total"),
        py::arg("reference_count"), py::arg("reference_total"));

  m.def(
      "keyness",
      [](const std::map<std::string, double>& target, const std::map<std::string, double>& reference) {
        py::list out;
        for (const auto& r : gs::metrics::keyness(target, reference)) {
          py::dict d;
          d["group_id"] = r.group_id;
          d["g2"] = r.g2;
          d["direction"] = std::string(gs::metrics::to_string(r.direction));
          d["target_rel_freq"] = r.target_rel_freq();
          d["reference_rel_freq"] = r.reference_rel_freq();
          out.append(d);
        }
        return out;
      },
      py::arg("target"), py::arg("reference"));

  m.def("default_specs", [] {
    py::list out;
    for (const auto& s : gs::econ::default_specs()) {
      py::dict d;
      d["name"] = s.name;
      d["terms"] = s.terms;
      out.append(d);
    }
    return out;
  });

  m.def(
      "fit_ols",
      [](const py::list& rows, const std::vector<std::string>& terms, const std::string& name, bool fixed_effects,
         bool cluster_robust) {
        std::vector<gs::econ::PanelRow> panel;
        for (const auto& item : rows) {
          py::dict row = item.cast<py::dict>();
          gs::econ::PanelRow r;
          r.party_id = row["party_id"].cast<std::string>();
          r.election_id = row.contains("election_id") ? row["election_id"].cast<std::string>() : "";
          r.similarity = row["similarity"].cast<double>();
          r.rr_support_lag1 = optional_number(row, "rr_support_lag1");
          r.centre_vote_diff = optional_number(row, "centre_vote_diff");
          r.gov_party = optional_number(row, "gov_party");
          r.centre_vote_share = optional_number(row, "centre_vote_share");
          r.cluster_id = row.contains("cluster_id") ? row["cluster_id"].cast<std::string>() : r.election_id;
          panel.push_back(std::move(r));
        }
        return ols_to_dict(gs::econ::fit_ols_fe(panel, {name, terms, fixed_effects, cluster_robust}));
      },
      py::arg("rows"), py::arg("terms"), py::arg("name") = "(1)", py::arg("fixed_effects") = true,
      py::arg("cluster_robust") = true);

  m.def(
      "score_detection",
      [](const std::map<std::string, std::set<std::string>>& predictions, const py::list& gold,
         const std::string& granularity) {
        auto g = gs::eval::parse_granularity(granularity);
        if (!g) throw gs::ValidationError("granularity must be binary or per_group");
        std::vector<gs::eval::GoldLabel> labels;
        for (const auto& item : gold) {
          py::dict d = item.cast<py::dict>();
          gs::eval::GoldLabel l;
          l.sentence_id = d["sentence_id"].cast<std::string>();
          l.has_group = d["has_group"].cast<bool>();
          if (d.contains("groups"))
            for (const auto& grp : d["groups"]) l.groups.insert(grp.cast<std::string>());
          if (d.contains("extra_group")) l.extra_group = d["extra_group"].cast<bool>();
          labels.push_back(std::move(l));
        }
        auto report = gs::eval::score_detection(predictions, labels, *g);
        return json_to_py(nlohmann::json::parse(gs::eval::report_json(report)));
      },
      py::arg("predictions"), py::arg("gold"), py::arg("granularity") = "binary");

  m.def(
      "run_stage",
      [](const std::string& stage, const std::filesystem::path& config_path, bool force, bool no_cache) {
        auto config = gs::pipeline::load_config(config_path);
        gs::pipeline::RunOptions options;
        options.force = force;
        options.no_cache = no_cache;
        std::vector<gs::pipeline::StageResult> results;
        {
          py::gil_scoped_release release;
          if (stage == "all") {
            results = gs::pipeline::run_all(config, options);
          } else {
            auto s = gs::pipeline::parse_stage(stage);
            if (!s) throw gs::ValidationError("unknown stage \"" + stage + "\"");
            results.push_back(gs::pipeline::run_stage(*s, config, options));
          }
        }
        py::list out;
        for (const auto& r : results) {
          py::dict d;
          d["stage"] = std::string(gs::pipeline::to_string(r.stage));
          d["outputs"] = r.outputs;
          d["warnings"] = r.warnings;
          out.append(d);
        }
        return out;
      },
      py::arg("stage"), py::arg("config_path"), py::arg("force") = false, py::arg("no_cache") = false);
}
