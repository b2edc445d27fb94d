"""Two-layer ReLU perceptron trained with AdamW on mean cross-entropy.

Forward pass is softmax(relu(X @ W1) @ W2) with no bias terms.  Weight decay
is decoupled from the gradient, so `mlp_loss_and_grads` is the gradient of
the plain cross-entropy objective and can be checked against finite
differences directly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse

from layerprobe.probes.ridge import ProbePrediction


class DivergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class MlpConfig:
    hidden: int = 64
    epochs: int = 20
    batch_size: int = 256
    learning_rate: float = 1e-3
    weight_decay: float = 1e-2

    def __post_init__(self):
        if self.hidden < 1:
            raise ValueError("hidden size must be >= 1")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")


@dataclass(frozen=True)
class MlpProbe:
    w1: np.ndarray  # d x h
    w2: np.ndarray  # h x c
    config: MlpConfig
    seed: int
    classes: np.ndarray | None = None
    epoch_losses: tuple[float, ...] = field(default=())


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def mlp_loss_and_grads(w1, w2, X, label_idx, n_classes: int):
    """Mean cross-entropy of the two-layer forward pass and its gradients.

    `label_idx` holds the integer class of each row.  Everything runs in
    float64 so the analytic gradients can be compared against central
    differences at tight tolerance.
    """
    X = np.asarray(X, dtype=np.float64)
    w1 = np.asarray(w1, dtype=np.float64)
    w2 = np.asarray(w2, dtype=np.float64)
    m = X.shape[0]
    pre = X @ w1
    hidden = np.maximum(pre, 0.0)
    logits = hidden @ w2
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_probs = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    loss = -log_probs[np.arange(m), label_idx].mean()

    dlogits = np.exp(log_probs)
    dlogits[np.arange(m), label_idx] -= 1.0
    dlogits /= m
    dw2 = hidden.T @ dlogits
    dhidden = dlogits @ w2.T
    dhidden[pre <= 0.0] = 0.0
    dw1 = X.T @ dhidden
    return loss, dw1, dw2


def _to_label_indices(Y, classes):
    """Accept one-hot (dense or sparse) or raw labels; return (idx, classes)."""
    if scipy.sparse.issparse(Y):
        return np.asarray(Y.argmax(axis=1)).ravel(), classes
    Y = np.asarray(Y)
    if Y.ndim == 2:
        return Y.argmax(axis=1), classes
    uniq = np.unique(Y) if classes is None else np.asarray(classes)
    lookup = {label: j for j, label in enumerate(uniq.tolist())}
    return np.array([lookup[l] for l in Y.tolist()], dtype=np.int64), uniq


def fit_mlp(X, Y, config: MlpConfig = MlpConfig(), seed: int = 0, classes=None) -> MlpProbe:
    """Train with AdamW (decoupled weight decay), deterministically in `seed`.

    Y may be a one-hot matrix or a 1-D label array.  Raises DivergenceError
    if the loss goes non-finite, reporting the epoch.
    """
    X = np.asarray(X, dtype=np.float64)
    label_idx, classes = _to_label_indices(Y, classes)
    m, d = X.shape
    if scipy.sparse.issparse(Y) or (np.asarray(Y).ndim == 2):
        n_classes = Y.shape[1]
    else:
        n_classes = len(classes)

    rng = np.random.default_rng(seed)
    # Zero-mean init scaled by 1/sqrt(fan-in).
    w1 = rng.normal(0.0, 1.0, size=(d, config.hidden)) / np.sqrt(d)
    w2 = rng.normal(0.0, 1.0, size=(config.hidden, n_classes)) / np.sqrt(config.hidden)

    beta1, beta2, eps = 0.9, 0.999, 1e-8
    m1 = [np.zeros_like(w1), np.zeros_like(w2)]
    m2 = [np.zeros_like(w1), np.zeros_like(w2)]
    step = 0
    lr, wd = config.learning_rate, config.weight_decay

    epoch_losses = []
    for epoch in range(config.epochs):
        order = rng.permutation(m)
        batch_losses = []
        for start in range(0, m, config.batch_size):
            batch = order[start : start + config.batch_size]
            loss, dw1, dw2 = mlp_loss_and_grads(w1, w2, X[batch], label_idx[batch], n_classes)
            if not np.isfinite(loss):
                raise DivergenceError(f"non-finite training loss at epoch {epoch + 1}")
            batch_losses.append(loss)
            step += 1
            for i, (w, g) in enumerate(((w1, dw1), (w2, dw2))):
                w *= 1.0 - lr * wd  # decoupled decay, applied before the step
                m1[i] = beta1 * m1[i] + (1 - beta1) * g
                m2[i] = beta2 * m2[i] + (1 - beta2) * g * g
                mhat = m1[i] / (1 - beta1**step)
                vhat = m2[i] / (1 - beta2**step)
                w -= lr * mhat / (np.sqrt(vhat) + eps)
        epoch_losses.append(float(np.mean(batch_losses)))

    return MlpProbe(
        w1=w1,
        w2=w2,
        config=config,
        seed=seed,
        classes=None if classes is None else np.asarray(classes),
        epoch_losses=tuple(epoch_losses),
    )


def predict_mlp(probe: MlpProbe, X, return_scores: bool = False, chunk: int = 8192) -> ProbePrediction:
    """Argmax of the forward pass, ties to the lowest class index."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != probe.w1.shape[0]:
        raise ValueError(f"X must be (n, {probe.w1.shape[0]})")
    if return_scores:
        scores = _softmax(np.maximum(X @ probe.w1, 0.0) @ probe.w2)
        return ProbePrediction(indices=np.argmax(scores, axis=1), scores=scores)
    indices = np.empty(X.shape[0], dtype=np.int64)
    for start in range(0, X.shape[0], chunk):
        logits = np.maximum(X[start : start + chunk] @ probe.w1, 0.0) @ probe.w2
        indices[start : start + chunk] = np.argmax(logits, axis=1)
    return ProbePrediction(indices=indices)
