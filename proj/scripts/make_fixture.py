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

#!/usr/bin/env python3
"""Writes the synthetic end-to-end fixture under tests/fixtures/e2e.

Two countries with one language each, three parties per country and three
elections per party. Every sentence is built from a template and a tagged
phrase bank, so gold labels, recorded LLM responses and the embedding store
all follow from the same tags. Output is deterministic.
"""

import hashlib
import json
import math
import random
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
OUT = ROOT / "tests" / "fixtures" / "e2e"
DIM = 16

# (display form, group_id); group_id None marks a group outside the lexicon.
GROUPS = {
    "de": {
        "young_people": ["junge Menschen", "Jugendliche"],
        "older_people": ["Rentner", "Senioren", "ältere Menschen"],
        "women": ["Frauen", "Mütter"],
        "men": ["Männer", "Väter"],
        "high_education": ["Akademiker"],
        "low_education": ["Geringqualifizierte"],
        "christians": ["Christen"],
        "muslims": ["Muslime"],
        "high_income": ["Spitzenverdiener", "Vermögende"],
        "low_income": ["Geringverdiener", "Einkommensschwache"],
        "unemployed": ["Arbeitslose", "Langzeitarbeitslose"],
        "rural": ["Menschen im ländlichen Raum"],
        "urban": ["Stadtbewohner"],
        "migrants": ["Migranten", "Flüchtlinge", "Zuwanderer"],
        "families": ["Familien", "Alleinerziehende"],
        "manual_workers": ["Arbeiter", "Arbeitnehmer", "Handwerker"],
        "care_workers": ["Pflegepersonal"],
        "farmers": ["Landwirte", "Bauern"],
        "academic_professionals": ["Lehrer", "Ärzte"],
        "soldiers": ["Soldaten"],
        "students": ["Studierende", "Auszubildende"],
        "entrepreneurs": ["Unternehmer", "Selbstständige", "Mittelständler"],
    },
    "en": {
        "young_people": ["young people", "teenagers"],
        "older_people": ["pensioners", "the elderly", "older people"],
        "women": ["women", "mothers"],
        "men": ["men", "fathers"],
        "high_education": ["graduates"],
        "low_education": ["school leavers without qualifications"],
        "christians": ["Christians"],
        "muslims": ["Muslims"],
        "high_income": ["the rich", "top earners"],
        "low_income": ["the poor", "people on low incomes"],
        "unemployed": ["the unemployed", "jobseekers"],
        "rural": ["rural communities"],
        "urban": ["city dwellers"],
        "migrants": ["migrants", "refugees", "asylum seekers", "immigrants"],
        "families": ["families", "single parents"],
        "manual_workers": ["workers", "working people"],
        "care_workers": ["nurses", "carers"],
        "farmers": ["farmers"],
        "academic_professionals": ["teachers", "doctors"],
        "soldiers": ["soldiers", "veterans"],
        "students": ["students", "apprentices"],
        "entrepreneurs": ["entrepreneurs", "small businesses"],
    },
}

NOVEL = {
    "de": ["Pflegekräfte", "Pendler", "Mieter", "Polizisten", "Ehrenamtliche", "Kleinsparer", "Steuerzahler"],
    "en": ["commuters", "renters", "police officers", "volunteers", "small savers", "taxpayers", "shopkeepers"],
}

OTHERS = {
    "de": ["Klimaschutz", "Digitalisierung", "Infrastruktur", "Energiewende", "Verwaltung", "Haushaltsdisziplin"],
    "en": ["climate protection", "digitalisation", "infrastructure", "the energy transition",
           "public administration", "fiscal discipline"],
}

TEMPLATES_ONE = {
    "de": ["Wir stehen an der Seite von {a}.", "{A} verdienen unsere volle Unterstützung.",
           "Niemand darf {a} im Stich lassen.", "Wir bauen Bürokratie für {a} ab."],
    "en": ["We will stand up for {a}.", "{A} deserve our full support.",
           "No one should leave {a} behind.", "We will cut red tape for {a}."],
}
TEMPLATES_TWO = {
    "de": ["Unser Plan schafft bessere Bedingungen für {a} und {b}."],
    "en": ["Our plan delivers better conditions for {a} and {b}."],
}
TEMPLATES_NONE = {
    "de": ["Wir investieren in {o}.", "Unser Land braucht mehr {o}.", "{O} hat für uns Vorrang."],
    "en": ["We will invest in {o}.", "Our country needs {o}.", "{O} is a priority for the next parliament."],
}
# Sentences about a group without naming it.
IMPLICIT = {
    "de": [("Die unkontrollierte Zuwanderung muss enden.", "migrants", "Migranten"),
           ("Die Rente muss zum Leben reichen.", "older_people", "Rentner")],
    "en": [("Uncontrolled immigration must end.", "migrants", "migrants"),
           ("The state pension must be enough to live on.", "older_people", "pensioners")],
}

# Group emphasis per party family.
EMPHASIS = {
    "CentreLeft": ["manual_workers", "low_income", "women", "families", "care_workers", "unemployed",
                   "young_people", "students", "older_people", "migrants"],
    "CentreRight": ["entrepreneurs", "families", "farmers", "high_income", "soldiers", "older_people",
                    "rural", "christians", "academic_professionals", "manual_workers"],
    "RadicalRight": ["migrants", "families", "older_people", "farmers", "soldiers", "men", "rural",
                     "muslims", "manual_workers", "christians"],
}

COUNTRIES = [
    {
        "country": "DE", "language": "de",
        "elections": ["2005-09-18", "2009-09-27", "2013-09-22", "2017-09-24", "2021-09-26"],
        "parties": [("de_social", "CentreLeft"), ("de_union", "CentreRight"), ("de_nation", "RadicalRight")],
        "shares": {"de_social": [34.2, 23.0, 25.7, 20.5, 25.7], "de_union": [35.2, 33.8, 41.5, 32.9, 24.1],
                   "de_nation": [1.6, 1.5, 4.7, 12.6, 10.3]},
        "government": {"de_social": [True, True, False, True, True], "de_union": [False, True, True, True, True],
                       "de_nation": [False, False, False, False, False]},
    },
    {
        "country": "GB", "language": "en",
        "elections": ["2005-05-05", "2010-05-06", "2015-05-07", "2017-06-08", "2019-12-12"],
        "parties": [("gb_progress", "CentreLeft"), ("gb_heritage", "CentreRight"), ("gb_sovereign", "RadicalRight")],
        "shares": {"gb_progress": [35.2, 29.0, 30.4, 40.0, 32.1], "gb_heritage": [32.4, 36.1, 36.8, 42.4, 43.6],
                   "gb_sovereign": [2.2, 3.1, 12.6, 1.8, 2.0]},
        "government": {"gb_progress": [True, True, False, False, False],
                       "gb_heritage": [False, False, True, True, True],
                       "gb_sovereign": [False, False, False, False, False]},
    },
]
CORPUS_ELECTIONS = 3  # the last three elections carry manifestos


def norm(s):
    return " ".join(s.lower().split())


def cap(s):
    return s[0].upper() + s[1:]


def make_sentence(rng, lang, family):
    """Returns (text, lexicon groups, novel phrases, implicit (group, phrase) or None, other nouns)."""
    emphasis = EMPHASIS[family]
    roll = rng.random()
    if roll < 0.22:
        o = rng.choice(OTHERS[lang])
        t = rng.choice(TEMPLATES_NONE[lang])
        return t.format(o=o, O=cap(o)), [], [], None, [o]
    if roll < 0.28:
        text, group, phrase = rng.choice(IMPLICIT[lang])
        return text, [], [], (group, phrase), []
    if roll < 0.38:
        n = rng.choice(NOVEL[lang])
        t = rng.choice(TEMPLATES_ONE[lang])
        return t.format(a=n, A=cap(n)), [], [n], None, []

    def pick_group():
        g = rng.choice(emphasis) if rng.random() < 0.8 else rng.choice(sorted(GROUPS[lang]))
        return g, rng.choice(GROUPS[lang][g])

    g1, d1 = pick_group()
    if roll < 0.55:
        g2, d2 = pick_group()
        if g2 == g1:
            g2, d2 = None, rng.choice(NOVEL[lang])
        t = TEMPLATES_TWO[lang][0]
        text = t.format(a=d1, b=d2)
        groups = [(g1, d1)] + ([(g2, d2)] if g2 else [])
        novel = [] if g2 else [d2]
        return text, groups, novel, None, []
    t = rng.choice(TEMPLATES_ONE[lang])
    return t.format(a=d1, A=cap(d1)), [(g1, d1)], [], None, []


def response_for(i, lang, groups, novel, implicit, others):
    explicit = [d for _, d in groups] + novel
    implied = [implicit[1]] if implicit else []
    if lang == "de":
        keys = ("Explizit", "Implizit", "Sonstige") if i % 4 else ("explizite Gruppen", "implizite Gruppen", "sonstige")
    else:
        keys = ("explicit", "implicit", "others") if i % 4 else ("Explicit groups", "Implicit groups", "Others")
    obj = {keys[0]: explicit, keys[1]: implied, keys[2]: others}
    if i % 7 == 5 and len(explicit) == 1:
        obj[keys[0]] = explicit[0]  # a bare string instead of a list
    body = json.dumps(obj, ensure_ascii=False)
    if i % 29 == 17:
        return body[: len(body) // 2], False  # truncated, unrecoverable
    if i % 10 == 3:
        lead = "Hier ist die Ausgabe im JSON-Format:\n" if lang == "de" else "Here is the output in JSON format:\n"
        return lead + body + "\n", True
    if i % 10 == 6:
        return "```json\n" + body + "\n```", True
    return body, True


def phrase_vector(phrase, kind):
    seed = int.from_bytes(hashlib.sha256(("emb\x1f" + phrase).encode()).digest()[:8], "big")
    rng = random.Random(seed)
    noise = [rng.gauss(0.0, 1.0) for _ in range(DIM)]
    scale = {"lexicon": 0.55, "novel": 0.2, "other": 0.55}[kind]
    base = [0.0] * DIM
    base[0 if kind != "other" else 1] = 1.0
    v = [b + scale * n / math.sqrt(DIM) for b, n in zip(base, noise)]
    length = math.sqrt(sum(x * x for x in v))
    return [round(x / length, 6) for x in v]


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    rng = random.Random(20260418)
    manifestos, votes, transcripts, gold = [], [], [], []
    counter = 0
    for c in COUNTRIES:
        for party, family in c["parties"]:
            for k, date in enumerate(c["elections"]):
                votes.append((party, c["country"], date, c["shares"][party][k]))
        for k, date in enumerate(c["elections"]):
            if k < len(c["elections"]) - CORPUS_ELECTIONS:
                continue
            for party, family in c["parties"]:
                doc_id = f"{party}_{date[:4]}"
                n_sent = 15 + rng.randrange(5)
                sentences = [make_sentence(rng, c["language"], family) for _ in range(n_sent)]
                paragraphs, para = [], []
                for idx, s in enumerate(sentences):
                    para.append(s[0])
                    if idx % 5 == 4:
                        paragraphs.append(" ".join(para))
                        para = []
                if para:
                    paragraphs.append(" ".join(para))
                manifestos.append({
                    "doc_id": doc_id, "party_id": party, "party_family": family, "country": c["country"],
                    "election_date": date, "language": c["language"],
                    "vote_share_pct": c["shares"][party][k],
                    "in_government_prior": c["government"][party][k - 1],
                    "full_text": "\n".join(paragraphs),
                })
                for idx, (text, groups, novel, implicit, others) in enumerate(sentences):
                    sid = f"{doc_id}:{idx}"
                    raw, _ = response_for(counter, c["language"], groups, novel, implicit, others)
                    transcripts.append({"sentence_id": sid, "prompt": "", "raw_response": raw,
                                        "timestamp": "2026-04-18T00:00:00Z"})
                    if counter % 2 == 0:
                        gids = sorted({g for g, _ in groups} | ({implicit[0]} if implicit else set()))
                        has = bool(gids) or bool(novel)
                        gold.append({"sentence_id": sid, "has_group": has, "groups": gids,
                                     "extra_group": bool(novel) and not gids})
                    counter += 1

    lexicon = json.loads((ROOT / "data" / "seed_lexicon.json").read_text())
    store = {}
    for e in lexicon["entries"]:
        for syns in e["synonyms"].values():
            for s in syns:
                store[s] = phrase_vector(s, "lexicon")
    for lang in ("de", "en"):
        for n in NOVEL[lang]:
            store.setdefault(norm(n), phrase_vector(norm(n), "novel"))
        for o in OTHERS[lang]:
            store.setdefault(norm(o), phrase_vector(norm(o), "other"))
        for g, displays in GROUPS[lang].items():
            for d in displays:
                store.setdefault(norm(d), phrase_vector(norm(d), "lexicon"))

    def write(name, text):
        (OUT / name).write_text(text, encoding="utf-8")

    write("corpus.jsonl", "".join(json.dumps(m, ensure_ascii=False) + "\n" for m in manifestos))
    write("votes.csv", "party_id,country,election_date,vote_share_pct\n" +
          "".join(f"{p},{c},{d},{v}\n" for p, c, d, v in sorted(votes)))
    write("transcripts.jsonl", "".join(json.dumps(t, ensure_ascii=False) + "\n" for t in transcripts))
    write("gold.jsonl", "".join(json.dumps(g, ensure_ascii=False) + "\n" for g in gold))
    write("embeddings.tsv", "".join(p + "".join(f"\t{x}" for x in v) + "\n" for p, v in sorted(store.items())))
    config = {
        "corpus": {"path": "corpus.jsonl", "format": "jsonl"},
        "lexicon": "../../../data/seed_lexicon.json",
        "vote_history": "votes.csv",
        "gold": "gold.jsonl",
        "embedding": {"backend": "file", "store": "embeddings.tsv"},
        "llm": {"transport": "replay", "transcripts": "transcripts.jsonl", "workers": 2},
        "esf": {"mode": "avg_radius", "metric": "euclidean", "nu": 0.1, "kernel": "rbf"},
        "similarity_mode": "share_renormalized",
        "detection": "dictionary",
        "output_dir": "out",
    }
    write("config.json", json.dumps(config, indent=2) + "\n")
    print(f"{len(manifestos)} manifestos, {counter} sentences, {len(gold)} gold labels, "
          f"{len(store)} embeddings", file=sys.stderr)


if __name__ == "__main__":
    main()
