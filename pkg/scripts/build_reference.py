"""Regenerate src/semrerank/data/reference_en.tsv from the wordfreq package.

Counts are wordfreq's English frequencies scaled to a declared total of
1e9 tokens.  Only alphabetic words are kept.  wordfreq is needed for this
script only, not at runtime.
"""

import sys
from pathlib import Path

from wordfreq import top_n_list, word_frequency

TOTAL = 1_000_000_000
N = int(sys.argv[1]) if len(sys.argv) > 1 else 30000

out = Path(__file__).resolve().parents[1] / "src" / "semrerank" / "data" / "reference_en.tsv"
rows = []
for w in top_n_list("en", N):
    if not w.isalpha():
        continue
    c = round(word_frequency(w, "en") * TOTAL)
    if c > 0:
        rows.append(f"{w}\t{c}")
header = [
    "# General-English reference word counts (source: wordfreq, 'en', top %d)." % N,
    "#total\t%d" % TOTAL,
]
out.write_text("\n".join(header + rows) + "\n", encoding="utf-8")
print(f"wrote {len(rows)} rows to {out}")
