"""Validation-set hyperparameter selection over an explicit grid.

One probe is fitted per grid point on the training set only; the argmax of
validation accuracy wins, with ties resolved toward the cheaper setting
(smaller lambda, fewer trees, shallower depth, fewer epochs).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from layerprobe.probes.forest import ForestConfig, fit_forest_ova, predict_forest
from layerprobe.probes.mlp import MlpConfig, fit_mlp, predict_mlp
from layerprobe.probes.ridge import fit_ridge, one_hot, predict_linear

FAMILIES = ("linear", "mlp", "forest")

# Default grids; the ridge ladder spans 1e-2..1e2 around unscaled features.
DEFAULT_LINEAR_GRID = (1e-2, 1e-1, 1.0, 10.0, 100.0)
DEFAULT_FOREST_GRID = tuple(
    ForestConfig(trees=t, depth=d) for t in (50, 100) for d in (8, 16, None)
)
DEFAULT_MLP_GRID = (MlpConfig(),)

# One-hot targets go sparse beyond this class count.
_SPARSE_CLASS_THRESHOLD = 64


class ProtocolError(RuntimeError):
    pass


@dataclass(frozen=True)
class TuneResult:
    config: object
    probe: object
    validation_accuracy: float
    evaluations: tuple  # (config, validation accuracy) per grid point, in order


def fit_family(family: str, X, labels, config, seed: int = 0):
    """Fit one probe of the given family; `config` is the grid point."""
    labels = np.asarray(labels)
    if family == "linear":
        classes = np.unique(labels)
        Y, classes = one_hot(
            labels, classes, sparse=len(classes) > _SPARSE_CLASS_THRESHOLD
        )
        return fit_ridge(X, Y, lam=float(config), classes=classes)
    if family == "mlp":
        return fit_mlp(X, labels, config=config, seed=seed)
    if family == "forest":
        return fit_forest_ova(X, labels, config=config, seed=seed)
    raise ValueError(f"unknown probe family {family!r}")


def predict_family(family: str, probe, X) -> np.ndarray:
    """Predicted labels (not indices) for any probe family."""
    if family == "linear":
        indices = predict_linear(probe, X).indices
    elif family == "mlp":
        indices = predict_mlp(probe, X).indices
    elif family == "forest":
        indices = predict_forest(probe, X).indices
    else:
        raise ValueError(f"unknown probe family {family!r}")
    return probe.classes[indices]


def _grid_order(family: str, grid) -> list:
    if family == "linear":
        return sorted(float(g) for g in grid)
    if family == "mlp":
        return sorted(grid, key=lambda c: (c.epochs, c.hidden, c.batch_size))
    if family == "forest":
        return sorted(
            grid, key=lambda c: (c.trees, np.inf if c.depth is None else c.depth)
        )
    raise ValueError(f"unknown probe family {family!r}")


def tune(
    family: str,
    train: tuple,
    validation: tuple,
    grid: Sequence,
    seed: int = 0,
) -> TuneResult:
    """Pick the grid point with the best validation accuracy.

    `train` and `validation` are (X, labels, ids) triples; the id sets must
    be disjoint, which is what the split assignment guarantees.  Nothing is
    ever refitted on validation data.
    """
    grid = list(grid)
    if not grid:
        raise ValueError("empty hyperparameter grid")
    X_train, y_train, ids_train = train
    X_val, y_val, ids_val = validation
    overlap = set(map(int, ids_train)) & set(map(int, ids_val))
    if overlap:
        raise ProtocolError(
            f"train and validation overlap on {len(overlap)} ids, e.g. {sorted(overlap)[:3]}"
        )
    y_val = np.asarray(y_val)

    best = None
    evaluations = []
    for config in _grid_order(family, grid):
        probe = fit_family(family, X_train, y_train, config, seed=seed)
        predicted = predict_family(family, probe, X_val)
        acc = float(np.mean(predicted == y_val))
        evaluations.append((config, acc))
        if best is None or acc > best[2]:
            best = (config, probe, acc)
    config, probe, acc = best
    return TuneResult(
        config=config,
        probe=probe,
        validation_accuracy=acc,
        evaluations=tuple(evaluations),
    )
