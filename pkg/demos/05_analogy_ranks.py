"""Analogy completion: subtoken averaging vs whole-word vectors.

Builds a toy embedding table where the *whole-word* rows follow clean vector
arithmetic (king - man + woman = queen) but each word's *subtoken* rows are
noisy halves.  Whole-word composition should therefore rank the expected
word better, mirroring the usual finding that analogy structure lives in
whole-word embeddings.
"""

import numpy as np

from layerprobe.analogy import (
    AnalogyQuery,
    WordEncoding,
    run_analogy_suite,
    wholeword_win_count,
)

rng = np.random.default_rng(3)
words = ["man", "king", "woman", "queen", "prince", "princess", "apple", "stone"]

# Whole-word rows: gender direction g, royalty direction r, plus id noise.
g = np.array([1.0, 0, 0, 0, 0, 0])
r = np.array([0, 1.0, 0, 0, 0, 0])
whole = {
    "man": -g, "woman": g,
    "king": -g + r, "queen": g + r,
    "prince": -g + 0.5 * r, "princess": g + 0.5 * r,
    "apple": np.array([0, 0, 2.0, 0, 0, 0]),
    "stone": np.array([0, 0, 0, 2.0, 0, 0]),
}

rows = []
encodings = {}
for i, word in enumerate(words):
    clean = whole[word] + 0.05 * rng.standard_normal(6)
    noisy_a = clean / 2 + 0.6 * rng.standard_normal(6)
    noisy_b = clean / 2 + 0.6 * rng.standard_normal(6)
    rows += [noisy_a, noisy_b, clean]
    encodings[word] = WordEncoding(
        word, subtoken_ids=(3 * i, 3 * i + 1), wholeword_ids=(3 * i + 2,)
    )
table = np.array(rows, dtype=np.float32)

queries = [
    AnalogyQuery("man", "king", "woman", "queen"),
    AnalogyQuery("woman", "queen", "man", "king"),
    AnalogyQuery("man", "prince", "woman", "princess"),
    AnalogyQuery("king", "queen", "prince", "princess"),
]

results = run_analogy_suite(queries, table, encodings)
print("query                                  subtoken  wholeword")
for r_ in results:
    q = r_.query
    print(f"{q.a}:{q.b} :: {q.c}:{q.expected:<12}" .ljust(39), f"{r_.rank_subtoken:>8}  {r_.rank_wholeword:>9}")
print(f"\nwhole-word strictly better on {wholeword_win_count(results)}/{len(results)} queries (rank 1 is best)")
