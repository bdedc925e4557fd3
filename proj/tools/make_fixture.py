#!/usr/bin/env python3
"""Regenerate the bundled test fixture under tests/data/fixture.

The output is deterministic (fixed seed). Planted transitions between the
2020-21 base and 2022-23 post windows:
  entries: NG-Rust, IN-Haskell, BR-Go
  exits:   DE-Java, US-R
"""
import csv
import pathlib

import numpy as np

OUT = pathlib.Path(__file__).resolve().parent.parent / "tests" / "data" / "fixture"

COUNTRIES = ["US", "DE", "FR", "GB", "JP", "KR", "PL", "MX", "BR", "ZA", "IN", "ID", "KE", "NG"]
LANGUAGES = ["Python", "JavaScript", "Java", "C++", "Go", "R", "Rust", "Haskell"]
EXTRA = {"Markdown": 900, "YAML": 700, "COBOL": 4}

# Specialization sets, roughly nested: capable countries cover rare languages.
SPECIALIZED = {
    "US": {"Go", "R", "Rust", "Haskell"},
    "DE": {"C++", "Java", "Rust", "Haskell"},
    "FR": {"C++", "R", "Haskell", "Go"},
    "GB": {"R", "Go", "Haskell", "Python"},
    "JP": {"C++", "Rust", "Java"},
    "KR": {"C++", "Go", "Rust"},
    "PL": {"Java", "C++", "Rust"},
    "MX": {"JavaScript", "Java"},
    "BR": {"JavaScript", "Python"},
    "ZA": {"Python", "R"},
    "IN": {"Java", "JavaScript", "Python"},
    "ID": {"JavaScript", "Java"},
    "KE": {"JavaScript", "Python"},
    "NG": {"JavaScript"},
}
ENTRY = {("NG", "Rust"), ("IN", "Haskell"), ("BR", "Go")}
EXIT = {("DE", "Java"), ("US", "R")}

SIZE = dict(zip(COUNTRIES, [900, 300, 220, 280, 200, 150, 120, 110, 260, 50, 700, 140, 40, 60]))
POPULARITY = dict(zip(LANGUAGES, [1.0, 0.9, 0.7, 0.55, 0.35, 0.25, 0.2, 0.08]))


def specialized(country, lang, year):
    post = year >= 2022
    if (country, lang) in ENTRY:
        return post
    if (country, lang) in EXIT:
        return not post
    return lang in SPECIALIZED[country]


def main():
    rng = np.random.default_rng(11)
    rows = []
    for year in range(2020, 2024):
        for quarter in range(1, 5):
            for c in COUNTRIES:
                growth = 1.0 + 0.04 * (year - 2020)
                for lang in LANGUAGES:
                    planted = (c, lang) in ENTRY or (c, lang) in EXIT
                    lift = (4.0 if planted else 2.6) if specialized(c, lang, year) else 0.35
                    mean = SIZE[c] * POPULARITY[lang] * lift * growth
                    rows.append((int(round(mean * rng.uniform(0.93, 1.07))) + 1, lang, c, year, quarter))
                for lang, base in EXTRA.items():
                    rows.append((int(round(base * SIZE[c] / 300 * rng.uniform(0.9, 1.1))) + 1, lang, c, year, quarter))
    rows.sort(key=lambda r: (r[3], r[4], r[2], r[1]))
    with open(OUT / "languages.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["num_pushers", "language", "iso2_code", "year", "quarter"])
        w.writerows(rows)

    # Indicators loosely driven by a latent capability that also drives
    # the breadth of rare-language specialization.
    rare = {"Go", "R", "Rust", "Haskell", "C++"}
    cap = {c: len(SPECIALIZED[c] & rare) + rng.normal(0, 0.4) for c in COUNTRIES}
    pop = dict(zip(COUNTRIES, [331e6, 83e6, 67e6, 67e6, 126e6, 52e6, 38e6, 129e6, 213e6, 59e6, 1380e6, 274e6, 54e6, 206e6]))
    with open(OUT / "indicators.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["country", "gdp_pc", "population", "natural_resources", "gini_avg", "emissions_per_gdp",
                    "exports_usd", "patents", "eci_trade", "eci_tech", "eci_research"])
        for c in COUNTRIES:
            k = cap[c]
            gdp = float(np.exp(7.6 + 0.55 * k + rng.normal(0, 0.35)))
            nat = float(np.exp(-3.0 - 0.4 * k + rng.normal(0, 0.5)))
            gini = 45 - 2.5 * k + rng.normal(0, 3)
            emis = 0.45 - 0.05 * k + rng.normal(0, 0.04)
            exports = gdp * pop[c] * 0.25
            patents = float(np.exp(4 + 1.1 * k + rng.normal(0, 0.6)))
            eci = [k / 2 - 1 + rng.normal(0, 0.35) for _ in range(3)]
            w.writerow([c, f"{gdp:.0f}", f"{pop[c]:.0f}", f"{nat:.4f}", f"{gini:.1f}", f"{emis:.3f}",
                        f"{exports:.3g}", f"{patents:.0f}"] + [f"{v:.2f}" for v in eci])
        w.writerow(["XK", "4346", "1775378", "0.03", "29.0", "", "1.9e9", "3", "", "", ""])

    with open(OUT / "adjacency.csv", "w", newline="") as fh:
        fh.write("country_a,country_b\nDE,FR\nDE,PL\nUS,MX\nKE,ZA\nBR,NG\nFR,GB\nJP,KR\n")

    impact = dict(zip(LANGUAGES, [0.99, 0.95, 0.77, 0.82, 0.55, 0.40, 0.35, 0.21]))
    with open(OUT / "impact.csv", "w", newline="") as fh:
        fh.write("language,impact_score\n")
        for lang in LANGUAGES:
            fh.write(f"{lang},{impact[lang]:.2f}\n")
        fh.write("Fortran,0.10\n")


if __name__ == "__main__":
    main()
