"""Per-layer hidden-state extraction aligned to dataset manifests.

Each manifest row names a sentence and a target word position.  The
sentence goes through the model once; at every layer the hidden state at
the target word's last subword token represents the word.  Rows are written
in manifest order and the store digest binds the dump to the exact manifest
bytes, so the probing side can detect any mismatch.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
import torch

from layerprobe import corpus, tensorstore


@dataclass(frozen=True)
class AlignmentRecord:
    uid: int
    token_span: tuple[int, int]  # [first, last] subword indices, inclusive
    selected: int  # always the span end: last-subword pooling

    def __post_init__(self):
        if self.token_span[1] < self.token_span[0]:
            raise ValueError("empty token span")
        if self.selected != self.token_span[1]:
            raise ValueError("selected position must be the span end")


@dataclass(frozen=True)
class ExtractionResult:
    store_path: str
    layer_count: int
    hidden_dim: int
    alignments: tuple[AlignmentRecord, ...]
    skipped: tuple[int, ...]  # uids with no alignable subword (sentinel rows)


def target_char_span(text: str, target_index: int) -> tuple[int, int]:
    """Character span of the target word; manifest text is space-joined."""
    words = text.split(" ")
    if not 0 <= target_index < len(words):
        raise ValueError(f"target index {target_index} outside sentence")
    start = sum(len(w) + 1 for w in words[:target_index])
    return start, start + len(words[target_index])


def load_model_and_tokenizer(model_id: str, device: str = "cpu"):
    from transformers import AutoModel, AutoTokenizer

    tokenizer = AutoTokenizer.from_pretrained(model_id, use_fast=True)
    model = AutoModel.from_pretrained(model_id)
    model.to(device)
    model.eval()
    return model, tokenizer


def last_subword_position(offsets, special_mask, span: tuple[int, int]) -> int | None:
    """Index of the last subword whose character span intersects the word.

    Tokenizers sometimes merge a word with adjacent punctuation; any overlap
    with the word's span counts.  Special tokens never qualify."""
    start, end = span
    position = None
    for i, ((a, b), is_special) in enumerate(zip(offsets, special_mask)):
        if is_special or a == b:
            continue
        if a < end and b > start:
            position = i
    return position


def alignment_span(offsets, special_mask, span: tuple[int, int]):
    indices = [
        i
        for i, ((a, b), is_special) in enumerate(zip(offsets, special_mask))
        if not is_special and a != b and a < span[1] and b > span[0]
    ]
    if not indices:
        return None
    return indices[0], indices[-1]


def extract_activations(
    model_id: str,
    manifest_path,
    out_path,
    layers: str = "all",
    batch_size: int = 8,
    device: str = "cpu",
) -> ExtractionResult:
    """Dump hidden states for every manifest row into a container store.

    Layer 0 is the embedding-layer output; layers 1..N are the transformer
    block outputs.  Unalignable targets (for example truncated away by the
    model's length limit) get a zero sentinel row and are listed both in the
    returned result and in a `<store>.alignment.json` sidecar.

    The forward pass runs one sentence at a time; `batch_size` is accepted
    for interface compatibility and has no effect on the stored values.
    """
    if layers != "all":
        raise ValueError("only full-layer dumps are supported (--layers all)")
    rows = corpus.load_manifest(manifest_path)
    if not rows:
        raise ValueError(f"manifest {manifest_path} is empty")
    model, tokenizer = load_model_and_tokenizer(model_id, device=device)

    per_layer: list[list[np.ndarray]] = []
    alignments: list[AlignmentRecord] = []
    skipped: list[int] = []
    hidden_dim = None

    with torch.no_grad():
        for row in rows:
            text = row["text"]
            span = target_char_span(text, row["target_index"])
            encoded = tokenizer(
                text,
                return_offsets_mapping=True,
                return_special_tokens_mask=True,
                truncation=True,
                return_tensors="pt",
            )
            offsets = encoded["offset_mapping"][0].tolist()
            special = encoded["special_tokens_mask"][0].tolist()
            token_span = alignment_span(offsets, special, span)

            outputs = model(
                input_ids=encoded["input_ids"].to(device),
                attention_mask=encoded["attention_mask"].to(device),
                output_hidden_states=True,
            )
            states = outputs.hidden_states  # embedding output + every block
            if not per_layer:
                hidden_dim = states[0].shape[-1]
                per_layer = [[] for _ in states]

            if token_span is None:
                skipped.append(row["id"])
                for k in range(len(states)):
                    per_layer[k].append(np.zeros(hidden_dim, dtype=np.float32))
                continue
            position = token_span[1]
            alignments.append(
                AlignmentRecord(row["id"], (token_span[0], position), position)
            )
            for k, layer_states in enumerate(states):
                vector = layer_states[0, position].to(torch.float32).cpu().numpy()
                per_layer[k].append(vector)

    matrices = [np.vstack(vectors) for vectors in per_layer]
    header = tensorstore.StoreHeader(
        model_id=model_id,
        layer_count=len(matrices),
        example_count=len(rows),
        hidden_dim=int(hidden_dim),
        manifest_digest=tensorstore.manifest_digest_of_file(manifest_path),
    )
    tensorstore.write_store(header, matrices, out_path)

    sidecar = {
        "model": model_id,
        "skipped": skipped,
        "alignments": [
            {"id": a.uid, "span": list(a.token_span), "selected": a.selected}
            for a in alignments
        ],
    }
    with open(f"{out_path}.alignment.json", "w", encoding="utf-8") as f:
        json.dump(sidecar, f, indent=2, sort_keys=True)

    return ExtractionResult(
        store_path=str(out_path),
        layer_count=len(matrices),
        hidden_dim=int(hidden_dim),
        alignments=tuple(alignments),
        skipped=tuple(skipped),
    )
