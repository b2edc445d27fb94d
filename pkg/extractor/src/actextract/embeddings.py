"""Input-embedding export with per-word subtoken and whole-word encodings.

The subtoken encoding is the standard tokenization of the word with a
leading space (the in-sentence form for byte-level BPE; WordPiece and
SentencePiece tokenizers ignore the space).  The whole-word encoding is a
single vocabulary id when the word exists as one piece; otherwise it falls
back to the minimal tokenization and is flagged as such.
"""

from __future__ import annotations

import os

import numpy as np
import torch

from layerprobe import tensorstore

# Piece spellings that mark a word-initial vocabulary entry.
_WORD_PIECE_PREFIXES = ("Ġ", "▁", "")  # byte-BPE, SentencePiece, bare


def _encode(tokenizer, text: str) -> list[int]:
    return tokenizer.encode(text, add_special_tokens=False)


def word_encoding(tokenizer, word: str) -> dict:
    """Both encodings for one word; raises ValueError on zero tokens."""
    vocab = tokenizer.get_vocab()
    subtoken = _encode(tokenizer, " " + word) or _encode(tokenizer, word)
    if not subtoken:
        raise ValueError(f"word {word!r} produced zero tokens")

    wholeword = None
    for prefix in _WORD_PIECE_PREFIXES:
        piece = prefix + word
        if piece in vocab:
            wholeword = [vocab[piece]]
            break
    fallback = wholeword is None
    if fallback:
        bare = _encode(tokenizer, word)
        candidates = [ids for ids in (subtoken, bare) if ids]
        wholeword = min(candidates, key=len)
    return {"subtoken": subtoken, "wholeword": wholeword, "fallback": fallback}


def export_embeddings(model_id: str, words, out_path, device: str = "cpu") -> tensorstore.EmbeddingTable:
    """Write the input-embedding matrix and word encodings into a store.

    If `out_path` is an existing container (an activation dump), the
    embedding table is merged into its reserved slot atomically; otherwise a
    standalone store is created whose digest covers the word list.
    """
    from actextract.core import load_model_and_tokenizer

    model, tokenizer = load_model_and_tokenizer(model_id, device=device)
    with torch.no_grad():
        matrix = model.get_input_embeddings().weight.to(torch.float32).cpu().numpy()
    vocab_size = matrix.shape[0]
    pieces = tuple(tokenizer.convert_ids_to_tokens(list(range(vocab_size))))

    encodings = {}
    problems = []
    for word in words:
        try:
            encodings[word] = word_encoding(tokenizer, word)
        except ValueError as err:
            problems.append(str(err))
    if problems:
        raise ValueError("; ".join(problems))

    table = tensorstore.EmbeddingTable(
        vectors=matrix.astype(np.float32), pieces=pieces, encodings=encodings
    )

    if os.path.exists(out_path):
        header = tensorstore.read_header(out_path)
        if header.hidden_dim != matrix.shape[1]:
            raise ValueError(
                f"store hidden dim {header.hidden_dim} does not match the "
                f"model embedding dim {matrix.shape[1]}"
            )
        layers = [
            tensorstore.read_layer(out_path, k) for k in range(header.layer_count)
        ]
        tensorstore.write_store(header, layers, out_path, embedding=table)
    else:
        word_blob = "\n".join(words).encode("utf-8")
        header = tensorstore.StoreHeader(
            model_id=model_id,
            layer_count=1,
            example_count=1,
            hidden_dim=matrix.shape[1],
            manifest_digest=tensorstore.manifest_digest(word_blob),
        )
        placeholder = np.zeros((1, matrix.shape[1]), dtype=np.float32)
        tensorstore.write_store(header, [placeholder], out_path, embedding=table)
    return table
