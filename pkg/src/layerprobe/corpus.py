"""CoNLL-U ingestion: inflection labels, filtering, stratified splits, control tasks."""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import IO, Iterable, Mapping

import numpy as np

SPLIT_NAMES = ("train", "validation", "test")
SPLIT_RATIOS = (0.7, 0.1, 0.2)

# Alphabetic characters plus straight and typographic apostrophes.
WORD_PATTERN = re.compile(r"[A-Za-z'’]+\Z")


class ConlluParseError(ValueError):
    """Raised for malformed CoNLL-U input; message carries the line number."""


class Inflection(str, Enum):
    SINGULAR = "singular"
    PLURAL = "plural"
    BASE = "base"
    PAST = "past"
    THIRD_PERS = "3rd_pers"
    POSITIVE = "positive"
    COMPARATIVE = "comparative"
    SUPERLATIVE = "superlative"


class Pos(str, Enum):
    NOUN = "noun"
    VERB = "verb"
    ADJECTIVE = "adjective"


_UPOS_TO_POS = {"NOUN": Pos.NOUN, "VERB": Pos.VERB, "ADJ": Pos.ADJECTIVE}


@dataclass(frozen=True)
class Token:
    form: str
    lemma: str
    upos: str
    feats: Mapping[str, str]


@dataclass(frozen=True)
class SentenceAnnotation:
    tokens: tuple[Token, ...]
    source_id: str

    def __post_init__(self):
        if not self.tokens:
            raise ValueError("sentence has no tokens")

    @property
    def text(self) -> str:
        return " ".join(t.form for t in self.tokens)


@dataclass(frozen=True)
class DataPoint:
    sentence: SentenceAnnotation
    target_index: int
    lemma: str
    inflection: Inflection
    pos: Pos
    uid: int

    def __post_init__(self):
        if not 0 <= self.target_index < len(self.sentence.tokens):
            raise ValueError("target index outside sentence")
        if not self.lemma:
            raise ValueError("empty lemma")

    @property
    def form(self) -> str:
        return self.sentence.tokens[self.target_index].form


def _parse_feats(raw: str, lineno: int) -> dict[str, str]:
    if raw == "_":
        return {}
    feats: dict[str, str] = {}
    for item in raw.split("|"):
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise ConlluParseError(f"line {lineno}: malformed FEATS item {item!r}")
        if key in feats:
            raise ConlluParseError(f"line {lineno}: duplicate feature key {key!r}")
        feats[key] = value
    return feats


def parse_conllu(source: str | IO[str] | Iterable[str]) -> list[SentenceAnnotation]:
    """Parse CoNLL-U text into sentence annotations.

    Multiword-token ranges (``a-b`` ids) and empty nodes (``a.b`` ids) are
    skipped; their component tokens are kept.  A token line must have exactly
    the 10 tab-separated CoNLL-U columns.
    """
    lines = source.splitlines() if isinstance(source, str) else source
    sentences: list[SentenceAnnotation] = []
    tokens: list[Token] = []
    sent_id: str | None = None

    def flush():
        nonlocal tokens, sent_id
        if tokens:
            source_id = sent_id if sent_id is not None else f"sent{len(sentences) + 1}"
            sentences.append(SentenceAnnotation(tuple(tokens), source_id))
        tokens = []
        sent_id = None

    for lineno, line in enumerate(lines, start=1):
        line = line.rstrip("\n")
        if not line.strip():
            flush()
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("sent_id"):
                _, sep, value = body.partition("=")
                if sep:
                    sent_id = value.strip()
            continue
        cols = line.split("\t")
        if len(cols) != 10:
            raise ConlluParseError(
                f"line {lineno}: expected 10 tab-separated columns, got {len(cols)}"
            )
        token_id = cols[0]
        if "-" in token_id or "." in token_id:
            continue  # multiword range or empty node
        if not token_id.isdigit():
            raise ConlluParseError(f"line {lineno}: bad token id {token_id!r}")
        if not cols[1]:
            raise ConlluParseError(f"line {lineno}: empty surface form")
        tokens.append(Token(cols[1], cols[2], cols[3], _parse_feats(cols[5], lineno)))
    flush()
    return sentences


def derive_inflection(upos: str, feats: Mapping[str, str]) -> Inflection | None:
    """Map a UD (upos, feats) pair onto the 8-class inflection inventory.

    Returns None for anything outside nouns, verbs, and adjectives, and for
    verb forms (gerunds, non-past participles) with no class of their own.
    """
    if upos == "NOUN":
        number = feats.get("Number")
        if number == "Sing":
            return Inflection.SINGULAR
        if number == "Plur":
            return Inflection.PLURAL
        return None
    if upos == "VERB":
        if feats.get("Tense") == "Past":
            return Inflection.PAST
        if (
            feats.get("Person") == "3"
            and feats.get("Tense") == "Pres"
            and feats.get("Number", "Sing") == "Sing"
        ):
            # -s forms only; plural third-person presents are base forms.
            return Inflection.THIRD_PERS
        if feats.get("VerbForm") in ("Fin", "Inf"):
            return Inflection.BASE
        return None
    if upos == "ADJ":
        degree = feats.get("Degree")
        if degree == "Cmp":
            return Inflection.COMPARATIVE
        if degree == "Sup":
            return Inflection.SUPERLATIVE
        return Inflection.POSITIVE
    return None


def build_dataset(sentences: Iterable[SentenceAnnotation]) -> list[DataPoint]:
    """One DataPoint per labelable token whose form is alphabetic+apostrophes."""
    data: list[DataPoint] = []
    for sentence in sentences:
        for index, token in enumerate(sentence.tokens):
            label = derive_inflection(token.upos, token.feats)
            if label is None:
                continue
            if not WORD_PATTERN.fullmatch(token.form):
                continue
            if not token.lemma or token.lemma == "_":
                continue
            data.append(
                DataPoint(
                    sentence=sentence,
                    target_index=index,
                    lemma=token.lemma,
                    inflection=label,
                    pos=_UPOS_TO_POS[token.upos],
                    uid=len(data),
                )
            )
    return data


@dataclass(frozen=True)
class SplitAssignment:
    assignment: dict[int, str]
    seed: int
    ratios: tuple[float, float, float] = SPLIT_RATIOS

    def ids_for(self, split: str) -> list[int]:
        if split not in SPLIT_NAMES:
            raise ValueError(f"unknown split {split!r}")
        return sorted(uid for uid, s in self.assignment.items() if s == split)

    def to_json(self) -> str:
        payload = {
            "seed": self.seed,
            "ratios": list(self.ratios),
            "assignment": {str(k): v for k, v in sorted(self.assignment.items())},
        }
        return json.dumps(payload, sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "SplitAssignment":
        payload = json.loads(text)
        return cls(
            assignment={int(k): v for k, v in payload["assignment"].items()},
            seed=payload["seed"],
            ratios=tuple(payload["ratios"]),
        )


def _apportion(count: int, ratios: tuple[float, ...]) -> list[int]:
    # Largest-remainder allocation; off by at most 1 from count*ratio per slot.
    exact = [count * r for r in ratios]
    base = [int(np.floor(e)) for e in exact]
    shortfall = count - sum(base)
    order = sorted(range(len(ratios)), key=lambda i: (-(exact[i] - base[i]), i))
    for i in order[:shortfall]:
        base[i] += 1
    return base


def stratified_split(data: list[DataPoint], seed: int) -> SplitAssignment:
    """70/10/20 split stratified by inflection class, deterministic in the seed."""
    by_class: dict[str, list[int]] = {}
    for dp in data:
        by_class.setdefault(dp.inflection.value, []).append(dp.uid)
    for name, ids in sorted(by_class.items()):
        if len(ids) < 3:
            raise ValueError(
                f"inflection class {name!r} has {len(ids)} examples; need at least 3"
            )
    rng = np.random.default_rng(seed)
    assignment: dict[int, str] = {}
    for name in sorted(by_class):
        ids = np.array(sorted(by_class[name]), dtype=np.int64)
        ids = ids[rng.permutation(len(ids))]
        counts = _apportion(len(ids), SPLIT_RATIOS)
        start = 0
        for split, n in zip(SPLIT_NAMES, counts):
            for uid in ids[start : start + n]:
                assignment[int(uid)] = split
            start += n
    return SplitAssignment(assignment=assignment, seed=seed)


_TASK_CODES = {"lemma": 0, "inflection": 1}


@dataclass(frozen=True)
class ControlMapping:
    task: str
    mapping: dict[str, int]
    classes: tuple[str, ...]
    seed: int

    def label_for(self, form: str) -> int:
        return self.mapping[form.lower()]

    def to_json(self) -> str:
        payload = {
            "task": self.task,
            "seed": self.seed,
            "classes": list(self.classes),
            "mapping": self.mapping,
        }
        return json.dumps(payload, sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "ControlMapping":
        payload = json.loads(text)
        return cls(
            task=payload["task"],
            mapping=dict(payload["mapping"]),
            classes=tuple(payload["classes"]),
            seed=payload["seed"],
        )


def real_labels(data: list[DataPoint], task: str) -> list[str]:
    """The linguistic label of each data point for `task`, in dataset order."""
    if task == "lemma":
        return [dp.lemma for dp in data]
    if task == "inflection":
        return [dp.inflection.value for dp in data]
    raise ValueError(f"unknown task {task!r}")


def gen_control_labels(data: list[DataPoint], task: str, seed: int) -> ControlMapping:
    """Assign each word type a random label drawn from the real task's label
    distribution.  Same type, same label, everywhere; deterministic in
    (seed, task)."""
    if task not in _TASK_CODES:
        raise ValueError(f"unknown task {task!r}")
    labels = real_labels(data, task)
    counts = Counter(labels)
    classes = tuple(sorted(counts))
    freqs = np.array([counts[c] for c in classes], dtype=np.float64)
    freqs /= freqs.sum()
    types = sorted({dp.form.lower() for dp in data})
    rng = np.random.default_rng([seed, _TASK_CODES[task]])
    draws = rng.choice(len(classes), size=len(types), p=freqs)
    mapping = {t: int(d) for t, d in zip(types, draws)}
    return ControlMapping(task=task, mapping=mapping, classes=classes, seed=seed)


def write_manifest(data: list[DataPoint], path) -> None:
    """Dataset manifest as JSON Lines, one data point per line."""
    with open(path, "w", encoding="utf-8") as f:
        for dp in data:
            row = {
                "id": dp.uid,
                "text": dp.sentence.text,
                "target_index": dp.target_index,
                "lemma": dp.lemma,
                "inflection": dp.inflection.value,
                "pos": dp.pos.value,
            }
            f.write(json.dumps(row, ensure_ascii=False) + "\n")


def load_manifest(path) -> list[dict]:
    rows = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            if line.strip():
                rows.append(json.loads(line))
    return rows


def manifest_form(row: Mapping) -> str:
    """Surface form of the target word in a manifest row."""
    return row["text"].split(" ")[row["target_index"]]


def dataset_statistics(data: list[DataPoint]) -> dict:
    """Headline dataset statistics: sizes, category and inflection shares,
    sentence-length summary."""
    n = len(data)
    pos_counts = Counter(dp.pos.value for dp in data)
    infl_counts = Counter(dp.inflection.value for dp in data)
    sentences = {}
    targets_per_sentence: Counter = Counter()
    for dp in data:
        key = id(dp.sentence)
        sentences[key] = dp.sentence
        targets_per_sentence[key] += 1
    token_lengths = np.array(
        [len(s.tokens) for s in sentences.values()], dtype=np.float64
    )
    target_counts = np.array(
        [targets_per_sentence[k] for k in sentences], dtype=np.float64
    )
    unique_texts = {s.text for s in sentences.values()}
    stats = {
        "data_points": n,
        "unique_sentences": len(unique_texts),
        "sentence_annotations": len(sentences),
        "unique_lemmas": len({dp.lemma for dp in data}),
        "unique_word_forms": len({dp.form for dp in data}),
        "pos_counts": dict(sorted(pos_counts.items())),
        "pos_shares": {k: pos_counts[k] / n for k in sorted(pos_counts)},
        "inflection_counts": dict(sorted(infl_counts.items())),
        "inflection_shares": {k: infl_counts[k] / n for k in sorted(infl_counts)},
        "sentence_tokens_mean": float(token_lengths.mean()) if len(token_lengths) else 0.0,
        "sentence_tokens_median": float(np.median(token_lengths)) if len(token_lengths) else 0.0,
        "sentence_tokens_min": int(token_lengths.min()) if len(token_lengths) else 0,
        "sentence_tokens_max": int(token_lengths.max()) if len(token_lengths) else 0,
        "targets_per_sentence_mean": float(target_counts.mean()) if len(target_counts) else 0.0,
        "targets_per_sentence_median": float(np.median(target_counts)) if len(target_counts) else 0.0,
        "targets_per_sentence_min": int(target_counts.min()) if len(target_counts) else 0,
        "targets_per_sentence_max": int(target_counts.max()) if len(target_counts) else 0,
    }
    return stats
