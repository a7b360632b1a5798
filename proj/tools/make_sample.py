#!/usr/bin/env python3
"""Regenerates the synthetic sample corpus and its companion inputs in data/sample.

Two synthetic countries (XA English, XB German) over 2000-2009. A latent
country-year quality drives both the share of evidence/intuition vocabulary
in speeches and the indicator series, so the pipeline has a signal to find.
Output is a pure function of the seed.
"""

import argparse
import csv
import json
import math
import random
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent

LANG = {
    "en": {
        "common": (ROOT / "data/common_words/en.txt").read_text().split(),
        "neutral": "schools roads farmers taxes health workers pensions housing energy transport "
                   "families children budget industry rivers villages hospitals teachers prices wages".split(),
        "evidence": "data evidence statistics report study figures percent analysis research survey "
                    "examine assess demonstrate investigation measured".split(),
        "intuition": "feeling believe opinion conviction instinct doubt wrong false heart faith belief "
                     "distrust propaganda fake deception".split(),
        "procedural": "motion amendment agenda vote session adjourned item committee order floor reading "
                      "minutes quorum clause".split(),
        "names": "Smith Jones Taylor Brown Williams Wilson Johnson Davies Robinson Wright Thompson Evans "
                 "Walker White Roberts Green Hall Wood Jackson Clarke".split(),
        "chair_role": "Speaker",
        "short": ["Thank you very much.", "Hear, hear!", "I agree with that.", "Order, order."],
    },
    "de": {
        "common": (ROOT / "data/common_words/de.txt").read_text().split(),
        "neutral": "schulen straßen landwirte steuern gesundheit arbeitnehmer renten wohnungen energie "
                   "verkehr familien kinder haushalt industrie flüsse dörfer krankenhäuser lehrer preise "
                   "löhne".split(),
        "evidence": "daten statistik bericht studie zahlen prozent analyse forschung untersuchung prüfen "
                    "bewerten erklären analysieren umfrage gemessen".split(),
        "intuition": "gefühl glaube meinung überzeugung instinkt zweifel falsch misstrauen propaganda "
                     "unehrlich täuschung herz vertrauen empörung gefälscht".split(),
        "procedural": "antrag tagesordnung abstimmung sitzung ausschuss änderungsantrag geschäftsordnung "
                      "punkt lesung beschluss wortmeldung protokoll drucksache".split(),
        "names": "Müller Schmidt Schneider Fischer Weber Meyer Wagner Becker Schulz Hoffmann Koch "
                 "Richter Klein Wolf Neumann Schwarz Zimmermann Braun Krüger Hartmann".split(),
        "chair_role": "Präsident",
        "short": ["Vielen Dank.", "Sehr richtig!", "Das ist so.", "Bitte schön."],
    },
}

COUNTRIES = {"XA": {"lang": "en", "base": -0.3, "trend": 0.07},
             "XB": {"lang": "de", "base": 0.1, "trend": -0.03}}
YEARS = list(range(2000, 2010))


def sentence_text(rng, words):
    out, i = [], 0
    while i < len(words):
        n = rng.randint(8, 16)
        chunk = words[i:i + n]
        chunk[0] = chunk[0][:1].upper() + chunk[0][1:]
        chunk[-1] += "."
        out.extend(chunk)
        i += n
    return " ".join(out)


def substantive(rng, lex, q, n_tokens):
    p_ev = 0.013 * (1.0 + q)
    p_in = 0.013 * (1.0 - q)
    words = []
    for _ in range(n_tokens):
        u = rng.random()
        if u < p_ev:
            words.append(rng.choice(lex["evidence"]))
        elif u < p_ev + p_in:
            words.append(rng.choice(lex["intuition"]))
        elif rng.random() < 0.55:
            words.append(rng.choice(lex["common"]))
        else:
            words.append(rng.choice(lex["neutral"]))
    return sentence_text(rng, words)


def procedural(rng, lex):
    words = []
    for _ in range(rng.randint(40, 80)):
        words.append(rng.choice(lex["procedural"]) if rng.random() < 0.25 else rng.choice(lex["common"]))
    return sentence_text(rng, words)


def latent(rng):
    q = {}
    for c, spec in COUNTRIES.items():
        prev = 0.0
        for t, y in enumerate(YEARS):
            prev = 0.5 * prev + rng.gauss(0, 0.12)
            q[(c, y)] = max(-0.9, min(0.9, spec["base"] + spec["trend"] * t + prev))
    return q


def corpus(rng, q):
    rows, counter = [], 0

    def add(country, year, role, text, speaker=None):
        nonlocal counter
        counter += 1
        lang = COUNTRIES[country]["lang"]
        month, day = rng.randint(1, 12), rng.randint(1, 28)
        rows.append({
            "id": f"{country}-{year}-{counter:04d}",
            "country": country,
            "chamber": "lower" if rng.random() < 0.8 else "upper",
            "date": f"{year}-{month:02d}-{day:02d}",
            "speaker": speaker or rng.choice(LANG[lang]["names"]),
            "role": role,
            "lang": lang,
            "text": text,
        })

    for c, spec in COUNTRIES.items():
        lex = LANG[spec["lang"]]
        for y in YEARS:
            for _ in range(6):
                add(c, y, "Member", substantive(rng, lex, q[(c, y)], rng.randint(160, 420)))
            add(c, y, "Member", procedural(rng, lex))
            add(c, y, lex["chair_role"], procedural(rng, lex))
            if y % 3 == 0:
                add(c, y, "Member", rng.choice(lex["short"]))
            if y % 4 == 1:
                add(c, y, "Member", ", ".join(rng.sample(lex["names"], 15)) + ", " +
                    ", ".join(rng.sample(lex["names"], 15)) + ".")
            if y % 5 == 2:
                original = rows[-3]["text"] if rows[-3]["country"] == c else rows[-1]["text"]
                add(c, y, "Member", "  " + original.replace(" ", "  ", 3) + " ")
    # A row with empty text is rejected at ingest.
    add("XA", 2005, "Member", "   ")
    return rows


def indicators(rng, q):
    ind, gdp = [], []
    offsets = {"XA": 9.8, "XB": 10.2}
    for c in COUNTRIES:
        for y in range(1999, 2011):
            qq = q.get((c, y), 0.0)
            ddi = min(0.95, max(0.05, 0.55 + 0.18 * qq + rng.gauss(0, 0.03)))
            client = 0.35 - 0.15 * qq + rng.gauss(0, 0.04)
            judicial = 1.0 + 0.6 * qq + rng.gauss(0, 0.1)
            log_gdp = offsets[c] + 0.02 * (y - 2000) + rng.gauss(0, 0.02)
            tpl = 0.4 + 1.6 * ddi - 0.9 * client + 0.5 * judicial - 0.1 * log_gdp + 0.4 * qq + rng.gauss(0, 0.05)
            ind.append({"country_text_id": c, "year": y, "v2x_delibdem": f"{ddi:.4f}",
                        "v2cltrnslw": f"{tpl:.4f}", "v2xnp_client": f"{-client:.4f}",
                        "v2juhcind": f"{judicial:.4f}"})
            gdp.append({"countrycode": {"XA": "XAA", "XB": "XBB"}[c], "year": y, "gdppc": f"{math.exp(log_gdp):.2f}"})
    return ind, gdp


def annotations(rng):
    lex = LANG["en"]
    out = []
    for i in range(80):
        q = rng.uniform(-0.9, 0.9)
        words, ev, inn = [], 0, 0
        for _ in range(rng.randint(30, 50)):
            u = rng.random()
            if u < 0.06 * (1 + q):
                words.append(rng.choice(lex["evidence"]))
                ev += 1
            elif u < 0.06 * (1 + q) + 0.06 * (1 - q):
                words.append(rng.choice(lex["intuition"]))
                inn += 1
            else:
                words.append(rng.choice(lex["common"] + lex["neutral"]))
        evidence = max(1, min(7, round(1 + 1.4 * ev + rng.gauss(0, 1.2))))
        intuition = max(1, min(7, round(1 + 1.4 * inn + rng.gauss(0, 1.2))))
        out.append({"id": f"ann-{i:03d}", "evidence": evidence, "intuition": intuition,
                    "text": sentence_text(rng, words)})
    return out


def anchor_terms(lang):
    terms = {"evidence": [], "intuition": []}
    with open(ROOT / f"data/anchors/{lang}.tsv", encoding="utf-8") as f:
        for row in csv.DictReader(f, delimiter="\t"):
            term = row["term"].lower()
            if " " not in term:
                terms[row["category"]].append(term)
    return terms


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--out", type=Path, default=ROOT / "data/sample")
    args = ap.parse_args()
    rng = random.Random(args.seed)
    out = args.out
    out.mkdir(parents=True, exist_ok=True)

    q = latent(rng)
    with open(out / "corpus.jsonl", "w", encoding="utf-8") as f:
        for row in corpus(rng, q):
            f.write(json.dumps(row, ensure_ascii=False) + "\n")
        f.write('{"id": "XB-broken", "country": "XB", "text": \n')

    ind, gdp = indicators(rng, q)
    for name, rows in (("indicators.csv", ind), ("gdp.csv", gdp)):
        with open(out / name, "w", newline="", encoding="utf-8") as f:
            w = csv.DictWriter(f, fieldnames=list(rows[0]), lineterminator="\n")
            w.writeheader()
            w.writerows(rows)

    with open(out / "annotations.csv", "w", newline="", encoding="utf-8") as f:
        w = csv.DictWriter(f, fieldnames=["id", "evidence", "intuition", "text"], lineterminator="\n")
        w.writeheader()
        w.writerows(annotations(rng))

    lex = {k: [] for k in ("evidence", "intuition", "procedural")}
    for lang in ("en", "de"):
        for k in lex:
            lex[k] += LANG[lang][k]
        for k, terms in anchor_terms(lang).items():
            lex[k] += terms
    rules = {"seed": args.seed, "embedding_dim": 64, "category_weight": 3.0,
             "evidence_lexicon": sorted(set(lex["evidence"])),
             "intuition_lexicon": sorted(set(lex["intuition"])),
             "procedural_lexicon": sorted(set(lex["procedural"]))}
    (out / "mock_rules.json").write_text(json.dumps(rules, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")

    mapping = {"format": "jsonl",
               "fields": {"speech_id": "id", "country": "country", "chamber": "chamber", "date": "date",
                          "speaker": "speaker", "language": "lang", "text": "text"},
               "role_field": "role", "chair_roles": ["Speaker", "President", "Präsident"]}
    (out / "mapping.json").write_text(json.dumps(mapping, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")

    endpoint = {"base_url": "http://127.0.0.1:8089", "max_parallel": 4, "timeout": 30, "max_retries": 3,
                "backoff_ms": 50, "temperature": 0, "max_tokens": 64}
    config = {
        "out_dir": "../../out/sample",
        "corpus": {"files": ["corpus.jsonl"], "mapping": "mapping.json", "dedup_scope": "country"},
        "preprocess": {"common_words": {"en": "../common_words/en.txt", "de": "../common_words/de.txt"},
                       "ratio_threshold": 0.05, "min_tokens": 11, "chunk_target": 150, "chunk_min": 50},
        "rate": {"procedural_threshold": 2, "procedural_level": "speech",
                 "endpoints": [dict(endpoint, model_name=m) for m in ("mock-rater-a", "mock-rater-b", "mock-rater-c")]},
        "embed": {"endpoint": dict(endpoint, model_name="mock-embed", batch_size=16),
                  "anchors": {lang: f"../anchors/{lang}.tsv" for lang in ("en", "de", "it", "is", "pl", "tr")},
                  "anchor_embed_mode": "joined", "normalize_before_mean": False},
        "fuse": {"z_scope": "country"},
        "panel": {"indicators": "indicators.csv", "gdp": "gdp.csv", "seed": 42, "bootstrap_iters": 2000,
                  "lags": ["emi", "ddi"],
                  "indicator_mapping": {"columns": {"country": "country_text_id", "ddi": "v2x_delibdem",
                                                    "tpl": "v2cltrnslw", "clientelism": "v2xnp_client",
                                                    "judicial_independence": "v2juhcind"}},
                  "gdp_mapping": {"columns": {"country": "countrycode", "gdp_pc": "gdppc"},
                                  "country_aliases": {"XAA": "XA", "XBB": "XB"}}},
        "analyze": {"models": "../models/panel_models.json", "seed": 42, "bootstrap_iters": 2000,
                    "resampling": "rows", "level": 0.95},
        "validate": {"annotations": "annotations.csv", "language": "en", "compare": ["emi", "embedding"]},
        "plot": {"indicator": "ddi", "events": [{"country": "XA", "year": 2004, "label": "electoral reform"},
                                                {"country": "XB", "year": 2007, "label": "coalition change"}]},
    }
    (out / "config.json").write_text(json.dumps(config, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
