"""Reference masked-LM prediction for fruits_small.json.

Recomputes template 2 with no context, one to four masks, default widths
and budgets, frequency rescaling and the default prediction filter, and
prints the ranked distribution. Run from this directory:

    python3 golden_oracle.py > fruits_small_golden.txt
"""

import json
import os

HERE = os.path.dirname(os.path.abspath(__file__))
DATA = os.path.join(HERE, "..", "..", "crates", "core", "data")

MASK = "[MASK]"
PROMPT = "Examples of fruits are the {}."
BUDGETS = [3000, 1500, 400, 100]


def word_list(name):
    with open(os.path.join(DATA, name)) as f:
        return {l.strip() for l in f if l.strip() and not l.startswith("#")}


STOP = word_list("stopwords_en.txt")
INVARIANT = word_list("noun_invariant.txt")
IRREGULAR = {}
with open(os.path.join(DATA, "noun_irregular.tsv")) as f:
    for line in f:
        if line.strip() and not line.startswith("#"):
            p, s = line.rstrip("\n").split("\t")[:2]
            IRREGULAR[p.strip()] = s.strip()


def lemma(word):
    head, _, last = word.rpartition(" ")
    if last in INVARIANT:
        out = last
    elif last in IRREGULAR:
        out = IRREGULAR[last]
    elif len(last) < 4 or not last.endswith("s") or last[-2:] in ("ss", "us", "is"):
        out = last
    elif len(last) >= 5 and last.endswith("ies"):
        out = last[:-3] + "y"
    elif any(last.endswith(s) for s in ("sses", "ches", "shes", "xes")):
        out = last[:-2]
    else:
        out = last[:-1]
    return (head + " " + out) if head else out


def surface(pieces):
    s = ""
    for i, p in enumerate(pieces):
        if p.startswith("##"):
            s += p[2:]
        elif p[:1] in ("Ġ", "▁"):
            s += (" " if i else "") + p[1:]
        else:
            s += p
    return s


fixture = json.load(open(os.path.join(HERE, "fruits_small.json")))["prompts"]
freq = {}
for line in open(os.path.join(HERE, "fruits_small_frequency.csv")).read().splitlines()[1:]:
    t, c = line.rsplit(",", 1)
    freq[t] = int(c)
total = sum(freq.values())
floor = min(freq.values()) / total


def decode(m):
    widths = [BUDGETS[0]] if m == 1 else [100] + [15] * (m - 1)
    partials = [([], 1.0)]
    for width in widths:
        nxt = []
        for pieces, p in partials:
            query = PROMPT.format(surface(pieces) + MASK * (m - len(pieces)))
            ranking = fixture[query][0][:width]
            mass = sum(t["prob"] for t in ranking)
            for t in ranking:
                nxt.append((pieces + [t["token"]], p * t["prob"] / mass))
        partials = nxt
    return [(surface(ps).strip().lower(), p) for ps, p in partials]


weights = {}
for m in range(1, 5):
    group = sorted(decode(m), key=lambda c: (-c[1], c[0]))[: BUDGETS[m - 1]]
    for w, p in group:
        x = p * (freq[w] / total if w in freq else floor)
        weights[w] = max(weights.get(w, 0.0), x)
z = sum(weights.values())
assembled = {w: x / z for w, x in weights.items()}

merged = {}
for w, p in assembled.items():
    if w in STOP:
        continue
    l = lemma(w)
    if l in STOP:
        continue
    merged[l] = merged.get(l, 0.0) + p
z = sum(merged.values())
ranked = sorted(((w, x / z) for w, x in merged.items()), key=lambda c: (-c[1], c[0]))
coverage = sorted({lemma(w) for w in assembled if w not in STOP and lemma(w) not in STOP})

for i, (w, p) in enumerate(ranked, 1):
    print(f"{i}\t{w}\t{p:.9f}")
print("coverage\t" + " ".join(coverage))
