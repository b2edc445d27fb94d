"""Probe serialization: JSON metadata next to weight blobs stored in the
layer-container format.

A linear probe saves one weight matrix, an MLP saves two; each matrix lives
in its own single-layer container whose manifest digest binds it to the
metadata file.  Forest probes carry tree structure rather than weight
matrices and are not serialized; they are cheap to refit deterministically
from (config, seed)."""

from __future__ import annotations

import json
import os

import numpy as np

from layerprobe import tensorstore
from layerprobe.probes.mlp import MlpConfig, MlpProbe
from layerprobe.probes.ridge import LinearProbe


class NotSerializableError(TypeError):
    pass


def _weights_path(stem: str, index: int) -> str:
    return f"{stem}.w{index}.bin"


def _save_matrix(matrix: np.ndarray, path: str, digest: bytes, tag: str) -> None:
    header = tensorstore.StoreHeader(
        model_id=tag,
        layer_count=1,
        example_count=matrix.shape[0],
        hidden_dim=matrix.shape[1],
        manifest_digest=digest,
    )
    tensorstore.write_store(header, [np.asarray(matrix, dtype=np.float32)], path)


def save_probe(probe, stem: str) -> None:
    """Write `<stem>.json` plus one `<stem>.wK.bin` container per matrix."""
    if isinstance(probe, LinearProbe):
        meta = {
            "family": "linear",
            "config": {"lambda": probe.lam},
            "seed": None,
            "classes": None if probe.classes is None else probe.classes.tolist(),
            "weights": [os.path.basename(_weights_path(stem, 0))],
        }
        matrices = [probe.weights]
    elif isinstance(probe, MlpProbe):
        meta = {
            "family": "mlp",
            "config": {
                "hidden": probe.config.hidden,
                "epochs": probe.config.epochs,
                "batch_size": probe.config.batch_size,
                "learning_rate": probe.config.learning_rate,
                "weight_decay": probe.config.weight_decay,
            },
            "seed": probe.seed,
            "classes": None if probe.classes is None else probe.classes.tolist(),
            "weights": [
                os.path.basename(_weights_path(stem, 0)),
                os.path.basename(_weights_path(stem, 1)),
            ],
        }
        matrices = [probe.w1, probe.w2]
    else:
        raise NotSerializableError(
            "forest probes are not serialized; refit deterministically from "
            "the stored config and seed"
        )
    meta_bytes = json.dumps(meta, sort_keys=True).encode("utf-8")
    digest = tensorstore.manifest_digest(meta_bytes)
    for i, matrix in enumerate(matrices):
        _save_matrix(matrix, _weights_path(stem, i), digest, meta["family"])
    with open(f"{stem}.json", "wb") as f:
        f.write(meta_bytes)


def load_probe(stem: str):
    with open(f"{stem}.json", "rb") as f:
        meta_bytes = f.read()
    meta = json.loads(meta_bytes)
    digest = tensorstore.manifest_digest(meta_bytes)
    directory = os.path.dirname(os.path.abspath(f"{stem}.json"))
    matrices = []
    for name in meta["weights"]:
        path = os.path.join(directory, name)
        tensorstore.validate_store(path, meta_bytes)
        matrices.append(tensorstore.read_layer(path, 0).astype(np.float64))
    classes = None if meta["classes"] is None else np.asarray(meta["classes"])
    if meta["family"] == "linear":
        return LinearProbe(weights=matrices[0], lam=meta["config"]["lambda"], classes=classes)
    if meta["family"] == "mlp":
        return MlpProbe(
            w1=matrices[0],
            w2=matrices[1],
            config=MlpConfig(**meta["config"]),
            seed=meta["seed"],
            classes=classes,
        )
    raise NotSerializableError(f"unknown probe family {meta['family']!r}")
