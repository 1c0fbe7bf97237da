"""
Synthetic corpus and corpus statistics
======================================

Generate a 460-bill corpus with the same year histogram and class balance as
the reference dataset, write it as JSON lines, read it back and summarise it.
"""

import tempfile
from pathlib import Path

from billfate.corpus import corpus_stats, generate_synthetic_corpus, kenya_shaped_spec, parse_corpus, write_corpus

# %%
# The generator labels each bill with a linear rule over month, year,
# election year and category. ``noise`` flips a share of the labels.
spec = kenya_shaped_spec()
records = generate_synthetic_corpus(spec, seed=7)
print(records[0])

# %%
# Round trip through the on-disk format.
path = Path(tempfile.mkdtemp()) / "corpus.jsonl"
write_corpus(records, path)
assert parse_corpus(path) == records

# %%
st = corpus_stats(records)
print(f"{st.total} bills, {st.enacted} enacted, {st.not_enacted} not enacted")
print("top sponsor:", st.top_sponsor)
busiest = max(st.per_year, key=st.per_year.get)
print("busiest year:", busiest, st.per_year[busiest])

# %%
# Per-category share of the corpus and enacted / not-enacted percentages.
for label, (share, yes, no) in st.category_percentages().items():
    print(f"{label}  {share:5.1f}%  enacted {yes:5.1f}%  not enacted {no:5.1f}%")
