"""The three probe families and the linear separability gap.

On linearly separable data all families agree, so the gap is near zero.  On
an XOR layout the ridge probe is stuck near chance while the MLP and forest
solve it, which is exactly what a large gap is meant to flag.
"""

import numpy as np

from layerprobe.metrics import accuracy, separability_gap
from layerprobe.probes import (
    ForestConfig,
    MlpConfig,
    fit_forest_ova,
    fit_mlp,
    fit_ridge,
    one_hot,
    predict_forest,
    predict_linear,
    predict_mlp,
)


def blobs(centers, n_per, noise, seed):
    rng = np.random.default_rng(seed)
    X = np.vstack([c + noise * rng.standard_normal((n_per, len(c))) for c, _ in centers])
    y = np.concatenate([[label] * n_per for _, label in centers])
    return X, y


def evaluate(X_train, y_train, X_test, y_test):
    Y, classes = one_hot(y_train)
    linear = fit_ridge(X_train, Y, lam=0.1, classes=classes)
    lin = accuracy(classes[predict_linear(linear, X_test).indices], y_test)

    mlp = fit_mlp(
        X_train, y_train,
        config=MlpConfig(epochs=200, batch_size=64, learning_rate=1e-2, weight_decay=1e-3),
        seed=0,
    )
    nonlin = accuracy(mlp.classes[predict_mlp(mlp, X_test).indices], y_test)

    forest = fit_forest_ova(X_train, y_train, config=ForestConfig(trees=50, depth=8), seed=0)
    forest_acc = accuracy(forest.classes[predict_forest(forest, X_test).indices], y_test)

    print(f"  linear ridge   {lin:.3f}")
    print(f"  two-layer MLP  {nonlin:.3f}   gap vs linear: {separability_gap(nonlin, lin):+.3f}")
    print(f"  forest (OvA)   {forest_acc:.3f}   gap vs linear: {separability_gap(forest_acc, lin):+.3f}")


print("linearly separable blobs:")
planted = [(np.array([2.0, 0.0, 1.0, -1.0]), 0), (np.array([-2.0, 1.0, -1.0, 1.0]), 1)]
evaluate(*blobs(planted, 100, 0.3, seed=1), *blobs(planted, 50, 0.3, seed=2))

print("\nXOR layout (same-sign vs mixed-sign clusters):")
xor = [
    (np.array([1.0, 1.0]), 0),
    (np.array([-1.0, -1.0]), 0),
    (np.array([1.0, -1.0]), 1),
    (np.array([-1.0, 1.0]), 1),
]
evaluate(*blobs(xor, 100, 0.2, seed=3), *blobs(xor, 50, 0.2, seed=4))

print("\nA large positive gap means the label is present but nonlinearly encoded.")
