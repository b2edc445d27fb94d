"""Analogy-completion ranks for subtoken-averaged vs whole-word vectors.

For a query a:b::c:expected the target vector is vec(b) - vec(a) + vec(c);
candidates are ranked by descending cosine similarity to it (lower rank is
better), with a, b, c excluded and ties broken lexicographically.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from layerprobe.tensorstore import EmbeddingTable

MODES = ("subtoken_avg", "wholeword_sum")


class CoverageError(KeyError):
    """A query word is missing from the candidate vocabulary."""


@dataclass(frozen=True)
class WordEncoding:
    word: str
    subtoken_ids: tuple[int, ...]  # standard tokenization, leading-space variant
    wholeword_ids: tuple[int, ...]  # single id when in-vocabulary, else minimal
    wholeword_is_fallback: bool = False

    def __post_init__(self):
        if not self.subtoken_ids or not self.wholeword_ids:
            raise ValueError(f"word {self.word!r} has an empty id list")


@dataclass(frozen=True)
class AnalogyQuery:
    a: str
    b: str
    c: str
    expected: str

    def __post_init__(self):
        if len({self.a, self.b, self.c, self.expected}) != 4:
            raise ValueError("analogy query needs four distinct words")


@dataclass(frozen=True)
class QueryRanks:
    query: AnalogyQuery
    rank_subtoken: int | None
    rank_wholeword: int | None
    error: str | None = None


def _vectors(table) -> np.ndarray:
    return table.vectors if isinstance(table, EmbeddingTable) else np.asarray(table)


def compose_vector(encoding: WordEncoding, table, mode: str) -> np.ndarray:
    """Mean of the subtoken rows, or sum of the whole-word rows."""
    vectors = _vectors(table)
    if mode == "subtoken_avg":
        ids = encoding.subtoken_ids
    elif mode == "wholeword_sum":
        ids = encoding.wholeword_ids
    else:
        raise ValueError(f"unknown mode {mode!r}")
    ids = np.asarray(ids)
    if ids.min() < 0 or ids.max() >= vectors.shape[0]:
        raise ValueError(f"token id out of range for {encoding.word!r}")
    rows = vectors[ids].astype(np.float64)
    return rows.mean(axis=0) if mode == "subtoken_avg" else rows.sum(axis=0)


def _candidate_matrix(
    words: Sequence[str], encodings: Mapping[str, WordEncoding], table, mode: str
) -> np.ndarray:
    return np.stack([compose_vector(encodings[w], table, mode) for w in words])


def analogy_rank(
    query: AnalogyQuery,
    table,
    encodings: Mapping[str, WordEncoding],
    mode: str,
    candidate_words: Sequence[str] | None = None,
) -> int:
    """1-based rank of the expected word among the candidates.

    The candidate vocabulary is the configured word list (default: every
    encoded word); a, b, c are excluded before ranking.
    """
    for word in (query.a, query.b, query.c):
        if word not in encodings:
            raise CoverageError(f"query word {query!r}: {word!r} has no encoding")
    pool = list(candidate_words) if candidate_words is not None else sorted(encodings)
    candidates = [w for w in pool if w not in (query.a, query.b, query.c)]
    if query.expected not in candidates or query.expected not in encodings:
        raise CoverageError(
            f"expected word {query.expected!r} absent from the candidate list"
        )
    target = (
        compose_vector(encodings[query.b], table, mode)
        - compose_vector(encodings[query.a], table, mode)
        + compose_vector(encodings[query.c], table, mode)
    )
    matrix = _candidate_matrix(candidates, encodings, table, mode)
    norms = np.linalg.norm(matrix, axis=1) * np.linalg.norm(target)
    with np.errstate(invalid="ignore", divide="ignore"):
        cosines = np.where(norms > 0, matrix @ target / norms, -1.0)
    order = sorted(range(len(candidates)), key=lambda i: (-cosines[i], candidates[i]))
    return order.index(candidates.index(query.expected)) + 1


def run_analogy_suite(
    queries: Sequence[AnalogyQuery],
    table,
    encodings: Mapping[str, WordEncoding],
    candidate_words: Sequence[str] | None = None,
) -> list[QueryRanks]:
    """Both modes per query; coverage failures are recorded, not fatal."""
    if not queries:
        raise ValueError("empty query list")
    results = []
    for query in queries:
        try:
            sub = analogy_rank(query, table, encodings, "subtoken_avg", candidate_words)
            whole = analogy_rank(query, table, encodings, "wholeword_sum", candidate_words)
            results.append(QueryRanks(query, sub, whole))
        except CoverageError as err:
            results.append(QueryRanks(query, None, None, error=str(err)))
    return results


def wholeword_win_count(results: Sequence[QueryRanks]) -> int:
    """Queries where whole-word strictly beats subtoken averaging."""
    return sum(
        1
        for r in results
        if r.error is None and r.rank_wholeword < r.rank_subtoken
    )


def read_queries_csv(path) -> list[AnalogyQuery]:
    queries = []
    with open(path, encoding="utf-8", newline="") as f:
        for row in csv.DictReader(f):
            queries.append(
                AnalogyQuery(row["a"], row["b"], row["c"], row["expected"])
            )
    return queries


def ranks_csv_lines(results: Sequence[QueryRanks]) -> list[str]:
    lines = ["a,b,c,expected,rank_subtoken,rank_wholeword"]
    for r in results:
        sub = "" if r.rank_subtoken is None else str(r.rank_subtoken)
        whole = "" if r.rank_wholeword is None else str(r.rank_wholeword)
        q = r.query
        lines.append(f"{q.a},{q.b},{q.c},{q.expected},{sub},{whole}")
    return lines
