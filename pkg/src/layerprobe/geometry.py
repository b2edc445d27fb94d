"""Per-layer PCA spectra and intrinsic dimensionality profiles.

The spectrum of a layer is the explained-variance ratio of each principal
component of its (mean-centered) activation matrix, computed from a singular
value decomposition of the centered data rather than its Gram matrix.  The
intrinsic dimensionality at threshold t is the smallest number of leading
components whose cumulative ratio reaches t percent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from layerprobe import tensorstore

DEFAULT_THRESHOLDS = (50, 60, 70, 80, 90, 95, 99, 100)


class DegenerateSpectrumError(ValueError):
    """All rows identical: the layer has zero total variance."""


@dataclass(frozen=True)
class VarianceSpectrum:
    ratios: np.ndarray  # descending, sums to 1, zero-padded to length d
    effective_rank: int
    layer_index: int | None = None


@dataclass(frozen=True)
class DimProfile:
    thresholds: tuple[int, ...]
    ids: dict  # layer -> {threshold: intrinsic dim}
    fractions: dict  # layer -> {threshold: id / d}
    effective_ranks: dict  # layer -> rank
    hidden_dim: int
    degenerate_layers: tuple[int, ...] = ()

    @property
    def layer_count(self) -> int:
        return len(self.ids) + len(self.degenerate_layers)

    def summary_layers(self) -> dict:
        """First, middle (floor(L/2)), and final layer indices."""
        total = self.layer_count
        return {"first": 0, "mid": total // 2, "final": total - 1}


def pca_spectrum(X, layer_index: int | None = None) -> VarianceSpectrum:
    """Explained-variance ratios of the sample covariance (divisor m - 1).

    The ratios carry min(m - 1, d) meaningful entries, zero-padded to d; the
    effective rank is the count of singular values above the numerical-rank
    cutoff.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValueError("need an (m, d) matrix with m >= 2")
    if not np.all(np.isfinite(X)):
        raise ValueError("activation matrix contains non-finite values")
    m, d = X.shape
    centered = X - X.mean(axis=0, keepdims=True)
    singular = np.linalg.svd(centered, compute_uv=False)
    if singular[0] == 0.0:
        raise DegenerateSpectrumError(
            "all rows identical; spectrum undefined"
            + (f" (layer {layer_index})" if layer_index is not None else "")
        )
    cutoff = singular[0] * max(m, d) * np.finfo(np.float64).eps
    singular = np.where(singular > cutoff, singular, 0.0)
    rank = int(np.count_nonzero(singular))
    variances = singular**2 / (m - 1)
    ratios = np.zeros(d, dtype=np.float64)
    ratios[: len(variances)] = variances / variances.sum()
    return VarianceSpectrum(ratios=ratios, effective_rank=rank, layer_index=layer_index)


def intrinsic_dim(spectrum: VarianceSpectrum, threshold: float) -> int:
    """Smallest k whose top-k cumulative ratio reaches threshold percent."""
    if not 0 < threshold <= 100:
        raise ValueError("threshold must lie in (0, 100]")
    cumulative = np.cumsum(spectrum.ratios[: spectrum.effective_rank])
    # f64 cumulative sums can undershoot 1.0 by an ulp; a hair of slack keeps
    # threshold=100 equal to the effective rank.
    k = int(np.searchsorted(cumulative, threshold / 100.0 - 1e-12)) + 1
    return max(1, min(k, spectrum.effective_rank))


def dim_profile(
    store_path,
    thresholds=DEFAULT_THRESHOLDS,
    row_indices=None,
    on_degenerate: str = "raise",
) -> DimProfile:
    """Spectrum and intrinsic dims for every layer of a store.

    `row_indices` restricts the analysis to a subset of examples (normally
    the training split).  Degenerate layers either raise (default) or are
    skipped and recorded when on_degenerate="skip".
    """
    if on_degenerate not in ("raise", "skip"):
        raise ValueError("on_degenerate must be 'raise' or 'skip'")
    header = tensorstore.read_header(store_path)
    thresholds = tuple(int(t) for t in thresholds)
    ids: dict[int, dict[int, int]] = {}
    fractions: dict[int, dict[int, float]] = {}
    ranks: dict[int, int] = {}
    degenerate: list[int] = []
    for layer in range(header.layer_count):
        X = tensorstore.read_layer(store_path, layer)
        if row_indices is not None:
            X = X[np.asarray(row_indices)]
        try:
            spectrum = pca_spectrum(X, layer_index=layer)
        except DegenerateSpectrumError:
            if on_degenerate == "raise":
                raise
            degenerate.append(layer)
            continue
        ids[layer] = {t: intrinsic_dim(spectrum, t) for t in thresholds}
        fractions[layer] = {t: ids[layer][t] / header.hidden_dim for t in thresholds}
        ranks[layer] = spectrum.effective_rank
    return DimProfile(
        thresholds=thresholds,
        ids=ids,
        fractions=fractions,
        effective_ranks=ranks,
        hidden_dim=header.hidden_dim,
        degenerate_layers=tuple(degenerate),
    )


def profile_csv_rows(profile: DimProfile) -> list[str]:
    """CSV body (layer, threshold, id, fraction), one row per cell."""
    lines = ["layer,threshold,id,fraction"]
    for layer in sorted(profile.ids):
        for t in profile.thresholds:
            lines.append(
                f"{layer},{t},{profile.ids[layer][t]},{profile.fractions[layer][t]:.6f}"
            )
    return lines


def summary_csv_rows(profile: DimProfile) -> list[str]:
    """First/mid/final summary in the style of the ID-by-layer tables."""
    anchors = profile.summary_layers()
    lines = ["threshold,first,mid,final"]
    for t in profile.thresholds:
        cells = [
            str(profile.ids[anchors[name]][t]) if anchors[name] in profile.ids else ""
            for name in ("first", "mid", "final")
        ]
        lines.append(f"{t}," + ",".join(cells))
    return lines
