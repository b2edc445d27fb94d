"""Tokens-per-target-word statistics under both counting conventions.

`aligned` counts only the subword pieces that overlap the target word
inside its sentence.  `standalone_with_specials` tokenizes the word on its
own (leading-space variant) with special tokens included, which is how
pipelines that feed words through encoder tokenizers end up counting; for
tokenizers that add no special tokens the two agree.
"""

from __future__ import annotations

import numpy as np

from layerprobe import corpus

from actextract.core import alignment_span, target_char_span


def _summary(counts) -> dict:
    counts = np.asarray(counts, dtype=np.float64)
    return {
        "avg_tokens_per_word": float(counts.mean()),
        "median_tokens_per_word": float(np.median(counts)),
        "max_tokens_per_word": float(counts.max()),
        "percent_multitoken": float(100.0 * np.mean(counts >= 2)),
    }


def tokenization_stats(manifest_path, model_id: str, tokenizer=None) -> dict:
    """Average, median, max tokens per target word and percent split into
    two or more tokens, under both conventions."""
    if tokenizer is None:
        from transformers import AutoTokenizer

        tokenizer = AutoTokenizer.from_pretrained(model_id, use_fast=True)
    rows = corpus.load_manifest(manifest_path)
    if not rows:
        raise ValueError(f"manifest {manifest_path} is empty")

    aligned_counts = []
    specials_counts = []
    standalone_cache: dict[str, int] = {}
    for row in rows:
        text = row["text"]
        span = target_char_span(text, row["target_index"])
        encoded = tokenizer(
            text,
            return_offsets_mapping=True,
            return_special_tokens_mask=True,
            truncation=True,
        )
        token_span = alignment_span(
            encoded["offset_mapping"], encoded["special_tokens_mask"], span
        )
        if token_span is not None:
            aligned_counts.append(token_span[1] - token_span[0] + 1)

        word = corpus.manifest_form(row)
        if word not in standalone_cache:
            ids = tokenizer.encode(" " + word, add_special_tokens=True)
            if not ids:
                ids = tokenizer.encode(word, add_special_tokens=True)
            standalone_cache[word] = len(ids)
        specials_counts.append(standalone_cache[word])

    return {
        "model": model_id,
        "n_words": len(rows),
        "aligned": _summary(aligned_counts),
        "standalone_with_specials": _summary(specials_counts),
    }
