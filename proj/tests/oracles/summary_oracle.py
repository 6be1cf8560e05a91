#!/usr/bin/env python3
"""Independent recomputation of corpus summary statistics for the fixture.

Author keys: surname before the first comma (else the last whitespace
token), initials from the remaining letter runs; folded with Unicode NFKD
and lowercased.
"""
import json
import os
import re
import statistics
import sys
import unicodedata

HERE = os.path.dirname(os.path.abspath(__file__))
DATA = os.path.join(HERE, "..", "data")


def fold(s):
    s = unicodedata.normalize("NFKD", s)
    return "".join(c for c in s if not unicodedata.combining(c)).lower()


def key(name):
    name = name.strip()
    if "," in name:
        sur, fore = name.split(",", 1)
    elif " " in name:
        fore, sur = name.rsplit(" ", 1)
    else:
        sur, fore = name, ""
    sur_runs = re.findall(r"[^\W\d_]+|[-\s]", sur)
    surname = ""
    pending = ""
    for r in sur_runs:
        if r == "-":
            pending = "-"
        elif r.isspace():
            pending = pending or " "
        else:
            if surname:
                surname += pending
            pending = ""
            surname += fold(r)
    if not surname:
        return None
    initials = ""
    for run in re.findall(r"[^\W\d_]+", fore):
        if 2 <= len(run) <= 3 and run.isascii() and run.isupper():
            initials += run.lower()
        else:
            initials += fold(run[0])[0]
    return (surname, initials)


def mm(xs):
    if not xs:
        return {"mean": None, "median": None}
    return {"mean": statistics.fmean(xs), "median": statistics.median(xs)}


def main(path):
    recs = [json.loads(l) for l in open(path, encoding="utf-8") if l.strip()]
    refs = [len(r["references"]) for r in recs]
    auth = [len(r["authors"]) for r in recs]
    pages = [r["pages"] for r in recs if r["pages"] is not None]
    rpp = [len(r["references"]) / r["pages"] for r in recs if r["pages"]]
    years = {}
    for r in recs:
        years[r["year"]] = years.get(r["year"], 0) + 1
    keys = set()
    unusable = 0
    for r in recs:
        for a in r["authors"]:
            k = key(a)
            if k is None:
                unusable += 1
            else:
                keys.add(k)
    out = {
        "n_articles": len(recs),
        "n_references": sum(refs),
        "references_per_article": mm(refs),
        "authors_per_article": mm(auth),
        "pages_per_article": mm(pages),
        "references_per_page": mm(rpp),
        "n_articles_without_pages": sum(1 for r in recs if r["pages"] is None),
        "articles_per_year": {str(y): years[y] for y in sorted(years, reverse=True)},
        "n_author_mentions": sum(auth),
        "n_unique_authors": len(keys),
        "n_unusable_author_names": unusable,
        "author_keys": sorted([list(k) for k in keys]),
    }
    json.dump(out, sys.stdout, indent=2, ensure_ascii=False)
    sys.stdout.write("\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else os.path.join(DATA, "fixture_corpus.jsonl"))
