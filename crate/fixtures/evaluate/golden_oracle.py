"""Reference score matrices for config.toml.

Recomputes the frequency baseline, the USF norms walk and word2vec with one
context item on the demo lists, and writes matrix_<metric>_golden.csv for
coverage, scaled_ll, top_1 and top_5. Run from this directory:

    python3 golden_oracle.py
"""

import csv
import math
import os

import numpy as np

HERE = os.path.dirname(os.path.abspath(__file__))
RES = os.path.join(HERE, "..", "resources")
FLOOR = 1e-12
LIMIT = 1000


def read_lists():
    lists = {}
    with open(os.path.join(HERE, "..", "demo", "data.csv")) as f:
        for row in csv.DictReader(f):
            key = (row["id"], row["listnum"], row["category"])
            lists.setdefault(key, []).append(row["item"])
    return [(f"{p}/{n}/{c}", c, items) for (p, n, c), items in lists.items()]


def frequency():
    counts = {}
    with open(os.path.join(RES, "frequency.csv")) as f:
        for row in csv.DictReader(f):
            if len(row["term"].split()) <= 2:
                counts[row["term"]] = counts.get(row["term"], 0) + int(row["count"])
    return counts


def usf():
    cues = {}
    with open(os.path.join(RES, "norms_usf.tsv")) as f:
        for row in csv.DictReader(f, delimiter="\t"):
            r = cues.setdefault(row["cue"], {})
            r[row["response"]] = r.get(row["response"], 0.0) + float(row["strength"])
    return cues


def embeddings():
    rows = {}
    with open(os.path.join(RES, "w2v.txt")) as f:
        lines = f.read().splitlines()
    for line in lines[1:]:
        word, *vals = line.split()
        vec = np.array([np.float32(v) for v in vals], dtype=np.float32)
        norm = np.float32(0)
        for x in vec:
            norm = np.float32(norm + x * x)
        rows[word] = (vec.astype(np.float64), float(np.sqrt(norm)))
    return rows


def ranked(weights):
    return sorted(weights.items(), key=lambda kv: (-kv[1], kv[0]))


def outcome(dist, coverage, word):
    """(in_coverage, probability, rank) of word under a ranked distribution."""
    for i, (w, p) in enumerate(dist, 1):
        if w == word:
            return True, p, i
    return word in coverage, None, None


def censored(weights, used):
    kept = {w: x for w, x in weights.items() if w not in used}
    total = sum(kept.values())
    return [(w, x / total) for w, x in ranked(kept)][:LIMIT]


def predict_random(counts, category, history):
    return censored(counts, set(history)), set(counts)


def predict_usf(cues, category, history):
    # "animals" is not a cue; its singular is.
    cue = cues.get(category)
    if cue is None and category.endswith("s"):
        cue = cues.get(category[:-1])
    if not cue:
        return [], set()
    return censored(cue, set(history)), set(cue)


def predict_w2v(rows, category, history):
    query = [category] if category in rows else []
    for item in history[-1:]:
        if item in rows and item not in query:
            query.append(item)
    if not query:
        return [], set()
    scores = {}
    for w, (v, n) in rows.items():
        if w in query or w in history:
            continue
        scores[w] = sum(float(v @ rows[q][0]) / (n * rows[q][1]) for q in query) / len(query)
    top = ranked(scores)[:LIMIT]
    m = top[0][1]
    weights = [(w, math.exp(s - m)) for w, s in top]
    z = sum(x for _, x in weights)
    return [(w, x / z) for w, x in weights], set(rows)


def scores(outcomes):
    n = len(outcomes)
    coverage = sum(1 for c, _, _ in outcomes if c) / n
    lps = [math.log(max(p or 0.0, FLOOR)) for c, p, _ in outcomes if c]
    ll = sum(lps) / len(lps) if lps else math.log(FLOOR)
    top = {k: sum(1 for _, _, r in outcomes if r is not None and r <= k) / n for k in (1, 5)}
    return {"coverage": coverage, "scaled_ll": ll, "top_1": top[1], "top_5": top[5]}


def fixed6(x):
    s = f"{x:.6f}"
    return "0.000000" if s == "-0.000000" else s


def main():
    lists = read_lists()
    counts, cues, rows = frequency(), usf(), embeddings()
    functions = [
        ("random", lambda c, h: predict_random(counts, c, h)),
        ("usf", lambda c, h: predict_usf(cues, c, h)),
        ("word2vec/ct1", lambda c, h: predict_w2v(rows, c, h)),
    ]
    table = {}
    for label, predict in functions:
        for list_id, category, items in lists:
            outs = []
            for i, word in enumerate(items):
                dist, coverage = predict(category, items[:i])
                outs.append(outcome(dist, coverage, word))
            table[(label, list_id)] = scores(outs)
    for metric in ("coverage", "scaled_ll", "top_1", "top_5"):
        with open(os.path.join(HERE, f"matrix_{metric}_golden.csv"), "w") as f:
            f.write("function," + ",".join(l for l, _, _ in lists) + "\n")
            for label, _ in functions:
                cells = [fixed6(table[(label, l)][metric]) for l, _, _ in lists]
                f.write(label + "," + ",".join(cells) + "\n")


main()
