"""One-vs-all random forest: one binary ensemble per class, vote-fraction
scores, argmax prediction.

The per-class score s_j(x) is the fraction of trees voting for class j, so
s_j(x) * trees is always an integer in [0, trees].  The binary ensembles are
scikit-learn forests (sqrt-feature subsampling, bootstrap resampling); the
one-vs-all decomposition, deterministic per-class seeding, and vote counting
live here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.ensemble import RandomForestClassifier

from layerprobe.probes.ridge import ProbePrediction

# Tasks with more classes than this are refused outright: thousands of
# one-vs-all ensembles are not a tractable desk-scale computation.
DEFAULT_MAX_CLASSES = 512


class HighCardinalityError(ValueError):
    pass


@dataclass(frozen=True)
class ForestConfig:
    trees: int = 100
    depth: int | None = None  # None = unlimited
    max_classes: int = DEFAULT_MAX_CLASSES

    def __post_init__(self):
        if self.trees < 1:
            raise ValueError("need at least one tree")
        if self.depth is not None and self.depth < 1:
            raise ValueError("depth must be >= 1 or None")


@dataclass(frozen=True)
class ForestProbe:
    ensembles: tuple  # one fitted binary RandomForestClassifier per class
    classes: np.ndarray
    config: ForestConfig
    seed: int


def _class_seed(seed: int, class_index: int) -> int:
    state = np.random.SeedSequence([seed, class_index]).generate_state(1)[0]
    return int(state) % (2**31 - 1)


def fit_forest_ova(X, labels, config: ForestConfig = ForestConfig(), seed: int = 0) -> ForestProbe:
    """Fit one binary forest per class (class j vs rest)."""
    X = np.asarray(X)
    labels = np.asarray(labels)
    classes = np.unique(labels)
    if len(classes) < 2:
        raise ValueError("one-vs-all needs at least 2 classes")
    if len(classes) > config.max_classes:
        raise HighCardinalityError(
            f"forest disabled for high-cardinality task: {len(classes)} classes "
            f"exceeds the ceiling of {config.max_classes}"
        )
    ensembles = []
    for j, label in enumerate(classes.tolist()):
        positives = (labels == label).astype(np.int64)
        forest = RandomForestClassifier(
            n_estimators=config.trees,
            max_depth=config.depth,
            max_features="sqrt",
            bootstrap=True,
            n_jobs=1,
            random_state=_class_seed(seed, j),
        )
        forest.fit(X, positives)
        ensembles.append(forest)
    return ForestProbe(
        ensembles=tuple(ensembles), classes=classes, config=config, seed=seed
    )


def forest_scores(probe: ForestProbe, X) -> np.ndarray:
    """(n, c) matrix of vote fractions: per class, the share of its trees
    voting positive."""
    X = np.asarray(X)
    scores = np.empty((X.shape[0], len(probe.classes)), dtype=np.float64)
    for j, forest in enumerate(probe.ensembles):
        votes = np.zeros(X.shape[0], dtype=np.float64)
        for tree in forest.estimators_:
            votes += tree.predict(X)
        scores[:, j] = votes / len(forest.estimators_)
    return scores


def predict_forest(probe: ForestProbe, X, return_scores: bool = False) -> ProbePrediction:
    """Argmax over vote fractions, ties to the lowest class index."""
    scores = forest_scores(probe, X)
    indices = np.argmax(scores, axis=1)
    return ProbePrediction(indices=indices, scores=scores if return_scores else None)
