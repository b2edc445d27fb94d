"""Seekable binary container for per-layer activation matrices.

Layout (all integers little-endian):

    magic           8 bytes, b"SLEUTHAS"
    version         u32
    model id        u32 length + UTF-8 bytes
    layer count L   u32
    example count m u64
    hidden dim d    u32
    dtype           u8 (0 = f32)
    digest          32 bytes, SHA-256 of the dataset manifest
    index count     u32 (always L + 1)
    index entries   (i32 layer index, u64 offset, u64 length, 8-byte checksum)
    blocks          contiguous layer blocks, then the optional embedding block

The index reserves slot -1 for an embedding table (vocab x d matrix plus a
token-piece map); offset 0 marks the slot as empty.  Block checksums are
8-byte BLAKE2b digests.  Readers seek straight to a block, so reading one
layer never touches the others.
"""

from __future__ import annotations

import hashlib
import json
import os
import struct
import tempfile
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

MAGIC = b"SLEUTHAS"
VERSION = 1
DTYPE_F32 = 0
EMBEDDING_SLOT = -1

_HEADER_FIXED = struct.Struct("<8sI")
_INDEX_ENTRY = struct.Struct("<iQQ8s")


class StoreError(Exception):
    """Base error for container problems."""


class StoreFormatError(StoreError):
    """Bad magic, version, or structural layout."""


class StoreIntegrityError(StoreError):
    """Checksum mismatch or truncated block."""


class AlignmentError(StoreError):
    """Store was written against a different dataset manifest."""


@dataclass(frozen=True)
class StoreHeader:
    model_id: str
    layer_count: int
    example_count: int
    hidden_dim: int
    manifest_digest: bytes
    dtype: str = "f32"

    def __post_init__(self):
        if self.layer_count < 1 or self.example_count < 1 or self.hidden_dim < 1:
            raise ValueError("layer count, example count, and hidden dim must be >= 1")
        if len(self.manifest_digest) != 32:
            raise ValueError("manifest digest must be 32 bytes")
        if self.dtype != "f32":
            raise ValueError("only f32 stores are supported")


@dataclass(frozen=True)
class EmbeddingTable:
    vectors: np.ndarray  # V x d, float32
    pieces: tuple[str, ...]  # piece string for token id 0..V-1
    encodings: dict | None = None  # word -> {"subtoken": [...], "wholeword": [...]}

    def __post_init__(self):
        if self.vectors.ndim != 2 or self.vectors.shape[0] < 1:
            raise ValueError("embedding table must be a non-empty 2-D matrix")
        if len(self.pieces) != self.vectors.shape[0]:
            raise ValueError("one piece string per vocabulary row required")


def manifest_digest(manifest_bytes: bytes) -> bytes:
    return hashlib.sha256(manifest_bytes).digest()


def manifest_digest_of_file(path) -> bytes:
    with open(path, "rb") as f:
        return manifest_digest(f.read())


def _checksum(block: bytes) -> bytes:
    return hashlib.blake2b(block, digest_size=8).digest()


def _layer_bytes(matrix: np.ndarray) -> bytes:
    return np.ascontiguousarray(matrix, dtype="<f4").tobytes()


def _embedding_block(table: EmbeddingTable) -> bytes:
    vectors = np.ascontiguousarray(table.vectors, dtype="<f4")
    meta = {"pieces": list(table.pieces)}
    if table.encodings is not None:
        meta["encodings"] = table.encodings
    meta_bytes = json.dumps(meta, ensure_ascii=False, sort_keys=True).encode("utf-8")
    head = struct.pack("<QI", vectors.shape[0], vectors.shape[1])
    return head + vectors.tobytes() + struct.pack("<I", len(meta_bytes)) + meta_bytes


def write_store(
    header: StoreHeader,
    layers: Sequence[np.ndarray],
    path,
    embedding: EmbeddingTable | None = None,
) -> None:
    """Write all layers (and optionally an embedding table) atomically.

    Dimension and finiteness problems raise before any bytes hit disk.
    """
    if len(layers) != header.layer_count:
        raise ValueError(
            f"expected {header.layer_count} layers, got {len(layers)}"
        )
    shape = (header.example_count, header.hidden_dim)
    for k, matrix in enumerate(layers):
        if matrix.shape != shape:
            raise ValueError(f"layer {k} has shape {matrix.shape}, expected {shape}")
        if not np.all(np.isfinite(matrix)):
            raise ValueError(f"layer {k} contains NaN or Inf values")
    if embedding is not None and embedding.vectors.shape[1] != header.hidden_dim:
        raise ValueError("embedding table dim does not match header hidden dim")

    model_bytes = header.model_id.encode("utf-8")
    head = (
        _HEADER_FIXED.pack(MAGIC, VERSION)
        + struct.pack("<I", len(model_bytes))
        + model_bytes
        + struct.pack(
            "<IQIB", header.layer_count, header.example_count, header.hidden_dim, DTYPE_F32
        )
        + header.manifest_digest
        + struct.pack("<I", header.layer_count + 1)
    )
    index_size = (header.layer_count + 1) * _INDEX_ENTRY.size
    offset = len(head) + index_size

    entries = []
    blocks = []
    layer_len = header.example_count * header.hidden_dim * 4
    for k, matrix in enumerate(layers):
        block = _layer_bytes(matrix)
        entries.append((k, offset, layer_len, _checksum(block)))
        blocks.append(block)
        offset += layer_len
    if embedding is not None:
        block = _embedding_block(embedding)
        entries.append((EMBEDDING_SLOT, offset, len(block), _checksum(block)))
        blocks.append(block)
    else:
        entries.append((EMBEDDING_SLOT, 0, 0, b"\x00" * 8))
    # Embedding slot first in the index so layer k lives at index position k+1.
    entries.sort(key=lambda e: e[0])

    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(head)
            for entry in entries:
                f.write(_INDEX_ENTRY.pack(*entry))
            for block in blocks:
                f.write(block)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _read_exact(f, n: int, what: str) -> bytes:
    data = f.read(n)
    if len(data) != n:
        raise StoreIntegrityError(f"store truncated while reading {what}")
    return data


def _read_header_and_index(f) -> tuple[StoreHeader, dict[int, tuple[int, int, bytes]]]:
    magic, version = _HEADER_FIXED.unpack(_read_exact(f, _HEADER_FIXED.size, "magic"))
    if magic != MAGIC:
        raise StoreFormatError(f"bad magic {magic!r}, not a layer store")
    if version != VERSION:
        raise StoreFormatError(f"unsupported store version {version}")
    (model_len,) = struct.unpack("<I", _read_exact(f, 4, "model id length"))
    model_id = _read_exact(f, model_len, "model id").decode("utf-8")
    layer_count, example_count, hidden_dim, dtype = struct.unpack(
        "<IQIB", _read_exact(f, 17, "dimensions")
    )
    if dtype != DTYPE_F32:
        raise StoreFormatError(f"unknown dtype code {dtype}")
    digest = _read_exact(f, 32, "manifest digest")
    (n_entries,) = struct.unpack("<I", _read_exact(f, 4, "index count"))
    if n_entries != layer_count + 1:
        raise StoreFormatError(
            f"index holds {n_entries} entries, expected {layer_count + 1}"
        )
    index: dict[int, tuple[int, int, bytes]] = {}
    for _ in range(n_entries):
        layer, offset, length, checksum = _INDEX_ENTRY.unpack(
            _read_exact(f, _INDEX_ENTRY.size, "index entry")
        )
        index[layer] = (offset, length, checksum)
    header = StoreHeader(
        model_id=model_id,
        layer_count=layer_count,
        example_count=example_count,
        hidden_dim=hidden_dim,
        manifest_digest=digest,
    )
    return header, index


def read_header(path) -> StoreHeader:
    with open(path, "rb") as f:
        header, _ = _read_header_and_index(f)
    return header


def _read_block(f, entry: tuple[int, int, bytes], what: str) -> bytes:
    offset, length, checksum = entry
    f.seek(offset)
    block = _read_exact(f, length, what)
    if _checksum(block) != checksum:
        raise StoreIntegrityError(f"checksum mismatch in {what}")
    return block


def read_layer(path, layer_index: int) -> np.ndarray:
    """Read one layer matrix; cost is independent of the other layers."""
    with open(path, "rb") as f:
        header, index = _read_header_and_index(f)
        if not 0 <= layer_index < header.layer_count:
            raise IndexError(
                f"layer index {layer_index} out of range [0, {header.layer_count})"
            )
        block = _read_block(f, index[layer_index], f"layer {layer_index}")
    matrix = np.frombuffer(block, dtype="<f4").reshape(
        header.example_count, header.hidden_dim
    )
    return matrix


def read_embedding(path) -> EmbeddingTable:
    with open(path, "rb") as f:
        _, index = _read_header_and_index(f)
        offset, length, _ = index.get(EMBEDDING_SLOT, (0, 0, b""))
        if offset == 0:
            raise StoreFormatError("store has no embedding table")
        block = _read_block(f, index[EMBEDDING_SLOT], "embedding table")
    vocab, dim = struct.unpack_from("<QI", block, 0)
    start = struct.calcsize("<QI")
    data_len = vocab * dim * 4
    vectors = np.frombuffer(block, dtype="<f4", count=vocab * dim, offset=start)
    (meta_len,) = struct.unpack_from("<I", block, start + data_len)
    meta = json.loads(block[start + data_len + 4 : start + data_len + 4 + meta_len])
    return EmbeddingTable(
        vectors=vectors.reshape(vocab, dim),
        pieces=tuple(meta["pieces"]),
        encodings=meta.get("encodings"),
    )


def validate_store(path, manifest_bytes: bytes) -> StoreHeader:
    """Verify magic, version, every block checksum, and manifest alignment.

    Any analysis that pairs layer rows with manifest labels must call this
    first; a digest mismatch is a hard error, never a warning.
    """
    with open(path, "rb") as f:
        header, index = _read_header_and_index(f)
        for layer in sorted(index):
            offset, length, _ = index[layer]
            if layer == EMBEDDING_SLOT and offset == 0:
                continue
            what = "embedding table" if layer == EMBEDDING_SLOT else f"layer {layer}"
            _read_block(f, index[layer], what)
    expected = manifest_digest(manifest_bytes)
    if header.manifest_digest != expected:
        raise AlignmentError(
            "activations were extracted against a different dataset manifest"
        )
    return header
