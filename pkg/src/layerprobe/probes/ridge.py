"""Closed-form ridge regression onto one-hot class indicators.

The weight matrix solves (X'X + lambda*I) W = X'Y via a Cholesky
factorization of the regularized Gram matrix; the system is never inverted
explicitly.  Every fit is checked against the normal equations before it is
returned.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse

# Max-norm residual bound on the normal equations, relative to the
# right-hand-side scale.
RESIDUAL_RTOL = 1e-6


class SingularSystemError(np.linalg.LinAlgError):
    pass


@dataclass(frozen=True)
class ProbePrediction:
    indices: np.ndarray  # predicted class index per example
    scores: np.ndarray | None = None  # optional per-class scores


@dataclass(frozen=True)
class LinearProbe:
    weights: np.ndarray  # d x c
    lam: float
    classes: np.ndarray | None = None  # label for class index j, when known


def one_hot(labels, classes=None, sparse: bool = False):
    """One-hot {0,1} indicator matrix for integer or string labels.

    With `sparse=True` returns a CSR matrix, which keeps X'Y cheap when the
    label set runs to thousands of classes.
    """
    labels = np.asarray(labels)
    if classes is None:
        classes = np.unique(labels)
    classes = np.asarray(classes)
    lookup = {label: j for j, label in enumerate(classes.tolist())}
    try:
        cols = np.array([lookup[l] for l in labels.tolist()], dtype=np.int64)
    except KeyError as err:
        raise ValueError(f"label {err.args[0]!r} not in class set") from err
    m, c = len(labels), len(classes)
    if sparse:
        data = np.ones(m, dtype=np.float64)
        return scipy.sparse.csr_matrix((data, (np.arange(m), cols)), shape=(m, c)), classes
    dense = np.zeros((m, c), dtype=np.float64)
    dense[np.arange(m), cols] = 1.0
    return dense, classes


def fit_ridge(X, Y, lam: float, classes=None) -> LinearProbe:
    """Solve the ridge normal equations for multiclass indicator targets.

    Parameters
    ----------
    X : (m, d) array
    Y : (m, c) one-hot array, dense or CSR sparse
    lam : regularization strength, >= 0
    classes : optional labels for the c columns, recorded on the probe
    """
    X = np.asarray(X, dtype=np.float64)
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    if X.ndim != 2 or X.shape[0] < 1:
        raise ValueError("X must be a non-empty (m, d) matrix")
    if not np.all(np.isfinite(X)):
        raise ValueError("X contains non-finite values")
    if scipy.sparse.issparse(Y):
        if Y.shape[0] != X.shape[0]:
            raise ValueError("X and Y row counts differ")
        xty = np.asarray((Y.T @ X).T, dtype=np.float64)
    else:
        Y = np.asarray(Y, dtype=np.float64)
        if Y.ndim != 2 or Y.shape[0] != X.shape[0]:
            raise ValueError("Y must be (m, c) with the same m as X")
        if not np.all(np.isfinite(Y)):
            raise ValueError("Y contains non-finite values")
        xty = X.T @ Y

    gram = X.T @ X
    gram[np.diag_indices_from(gram)] += lam
    try:
        factor = scipy.linalg.cho_factor(gram, lower=True)
    except np.linalg.LinAlgError as err:
        if lam == 0:
            raise SingularSystemError(
                "X'X is singular at lambda = 0; use lambda > 0"
            ) from err
        raise
    weights = scipy.linalg.cho_solve(factor, xty)

    residual = np.max(np.abs(gram @ weights - xty))
    scale = max(1.0, np.max(np.abs(xty)))
    if residual > RESIDUAL_RTOL * scale:
        raise SingularSystemError(
            f"normal-equation residual {residual:.3e} exceeds "
            f"{RESIDUAL_RTOL:.0e} * {scale:.3e}; system too ill-conditioned"
        )
    return LinearProbe(
        weights=weights,
        lam=float(lam),
        classes=None if classes is None else np.asarray(classes),
    )


def predict_linear(
    probe: LinearProbe, X, return_scores: bool = False, chunk: int = 8192
) -> ProbePrediction:
    """Scores X @ W; predicted class is the argmax per row, ties to the
    lowest class index."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != probe.weights.shape[0]:
        raise ValueError(
            f"X has {X.shape[-1] if X.ndim == 2 else '?'} columns, "
            f"probe expects {probe.weights.shape[0]}"
        )
    if return_scores:
        scores = X @ probe.weights
        return ProbePrediction(indices=np.argmax(scores, axis=1), scores=scores)
    # Chunked argmax keeps memory flat when the class count is large.
    indices = np.empty(X.shape[0], dtype=np.int64)
    for start in range(0, X.shape[0], chunk):
        block = X[start : start + chunk] @ probe.weights
        indices[start : start + chunk] = np.argmax(block, axis=1)
    return ProbePrediction(indices=indices)
