# Copyright 2026 The GroupScope Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import json
import math
import os
from pathlib import Path

import pytest

import groupscope as gs

FIXTURES = Path(os.environ.get("GROUPSCOPE_TEST_FIXTURES", Path(__file__).resolve().parents[1] / "fixtures"))
SEED = FIXTURES.parents[1] / "data" / "seed_lexicon.json"


def test_text():
    assert gs.normalize("  Die   ARBEITER ") == "die arbeiter"
    assert gs.split_sentences("Wir helfen z. B. Familien. Und Arbeitern!", "de") == [
        "Wir helfen z. B. Familien.",
        "Und Arbeitern!",
    ]


def test_lexicon_match_and_expansion():
    lex = gs.Lexicon.load(str(SEED))
    assert "farmers" in lex.group_ids()
    assert lex.owner("de", "arbeiter") is not None
    hits = lex.match("Wir stehen an der Seite der Landwirte.", "de")
    assert [h["group_id"] for h in hits] == ["farmers"]

    grown = lex.accept_as_synonym("Bauersleute", "de", "farmers").accept_as_new_group("Pendler", "de")
    assert grown.version == lex.version + 2
    assert grown.owner("de", "bauersleute") == "farmers"
    assert gs.Lexicon.replay(lex, grown.journal_jsonl()) == grown
    with pytest.raises(gs.ValidationError):
        lex.accept_as_synonym("Arbeiter", "de", "farmers")


def test_parse_response():
    r = gs.parse_response('Sure: {"explicit": ["Farmers"], "implicit": [], "others": []}')
    assert r["ok"] and r["salvage_applied"]
    assert r["explicit"] == ["farmers"]
    bad = gs.parse_response("\x00\xff not json")
    assert not bad["ok"] and bad["error"]


def test_esf_and_ocsvm():
    pts = [[0.0, 0.0], [2.0, 0.0], [0.0, 2.0], [2.0, 2.0]]
    c = gs.fit_center(pts)
    assert c["center"] == [1.0, 1.0]
    assert c["radius_avg"] == pytest.approx(math.sqrt(2))
    model = gs.esf_fit(pts)
    assert model.classify([1.0, 1.0], "max_radius")[0]
    assert not model.classify([9.0, 9.0], "avg_radius")[0]
    fit = gs.fit_ocsvm(pts + [[1.0, 1.0]], nu=0.5, kernel="linear")
    assert sum(fit["alphas"]) == pytest.approx(1.0, abs=1e-8)
    assert all(0 <= a <= 1 / (0.5 * 5) + 1e-12 for a in fit["alphas"])


def test_metrics():
    assert gs.similarity({"g1": 0.5, "g2": 0.5}, {"g1": 1.0}) == 50.0
    assert gs.similarity({"g1": 1.0}, {"g2": 1.0}) == 0.0
    with pytest.raises(gs.ValidationError):
        gs.similarity({}, {"g1": 1.0})
    assert gs.log_likelihood_g2(10, 100, 20, 200) == pytest.approx(0.0, abs=1e-9)
    rows = gs.keyness({"farmers": 30, "workers": 5}, {"farmers": 5, "workers": 30})
    assert {r["group_id"]: r["direction"] for r in rows} == {
        "farmers": "target_typical",
        "workers": "reference_typical",
    }


def test_fit_ols_recovers_a_line():
    rows = [
        {"party_id": "p%d" % (i % 2), "cluster_id": "c%d" % (i % 3), "similarity": 3.0 + 2.0 * i + (i % 2),
         "rr_support_lag1": float(i)}
        for i in range(9)
    ]
    fit = gs.fit_ols(rows, ["rr_support_lag1"])
    assert fit["n_obs"] == 9
    assert fit["r2"] == pytest.approx(1.0)
    assert [s["name"] for s in gs.default_specs()] == ["(1)", "(2)", "(3)"]


def test_score_detection():
    gold = [
        {"sentence_id": "a", "has_group": True, "groups": ["farmers"]},
        {"sentence_id": "b", "has_group": False},
    ]
    report = gs.score_detection({"a": {"farmers"}, "b": set()}, gold, "binary")
    assert report["micro"]["f1"] == 1.0
    with pytest.raises(gs.ValidationError):
        gs.score_detection({"a": set()}, gold, "binary")


def test_pipeline_run(tmp_path, monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1767225600")
    e2e = FIXTURES / "e2e"
    config = json.loads((e2e / "config.json").read_text())
    config["corpus"]["path"] = str(e2e / "corpus.jsonl")
    config["lexicon"] = str(SEED)
    config["vote_history"] = str(e2e / "votes.csv")
    config["gold"] = str(e2e / "gold.jsonl")
    config["embedding"]["store"] = str(e2e / "embeddings.tsv")
    config["llm"]["transcripts"] = str(e2e / "transcripts.jsonl")
    config["output_dir"] = str(tmp_path / "out")
    path = tmp_path / "config.json"
    path.write_text(json.dumps(config))

    with pytest.raises(gs.DependencyError, match="run panel first"):
        gs.run_stage("regress", str(path))
    results = gs.run_stage("all", str(path))
    assert len(results) == 13
    out = tmp_path / "out"
    golden = e2e / "golden"
    for name in ("similarity.csv", "keyness.csv", "regression.txt"):
        assert (out / name).read_bytes() == (golden / name).read_bytes()
    with pytest.raises(gs.ValidationError):
        gs.run_stage("nonsense", str(path))
