"""Evaluation quantities: accuracy, macro-F1, selectivity, linear
separability gap, layer-trend regression, per-group breakdowns."""

from __future__ import annotations

import csv
import json
import os
import tempfile
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np


@dataclass(frozen=True)
class LayerReport:
    model_id: str
    task: str
    family: str
    layer: int
    accuracy: float
    macro_f1: float
    example_count: int

    def __post_init__(self):
        if not (0.0 <= self.accuracy <= 1.0 and 0.0 <= self.macro_f1 <= 1.0):
            raise ValueError("accuracy and macro-F1 must lie in [0, 1]")


@dataclass(frozen=True)
class TrendFit:
    slope: float  # per unit of normalized depth
    r_squared: float

    def __post_init__(self):
        if not 0.0 <= self.r_squared <= 1.0 + 1e-12:
            raise ValueError("R^2 must lie in [0, 1]")


def accuracy(pred: Sequence, gold: Sequence) -> float:
    """Fraction of exact matches."""
    pred = np.asarray(pred)
    gold = np.asarray(gold)
    if pred.shape != gold.shape or pred.ndim != 1:
        raise ValueError("pred and gold must be 1-D and the same length")
    if len(pred) == 0:
        raise ValueError("empty prediction list")
    return float(np.mean(pred == gold))


def macro_f1(pred: Sequence, gold: Sequence, classes: Iterable) -> float:
    """Unweighted mean of per-class F1.

    A class with neither predicted nor gold positives has P + R = 0 and
    contributes an F1 of 0 to the mean.
    """
    pred = np.asarray(pred)
    gold = np.asarray(gold)
    if pred.shape != gold.shape or pred.ndim != 1:
        raise ValueError("pred and gold must be 1-D and the same length")
    classes = list(dict.fromkeys(classes))
    if not classes:
        raise ValueError("empty class set")
    missing = set(gold.tolist()) - set(classes)
    if missing:
        raise ValueError(f"gold labels outside the class set: {sorted(missing)[:5]}")
    total = 0.0
    for c in classes:
        pred_pos = pred == c
        gold_pos = gold == c
        tp = float(np.sum(pred_pos & gold_pos))
        precision = tp / pred_pos.sum() if pred_pos.any() else 0.0
        recall = tp / gold_pos.sum() if gold_pos.any() else 0.0
        if precision + recall > 0:
            total += 2 * precision * recall / (precision + recall)
    return total / len(classes)


def selectivity(linguistic_accuracy: float, control_accuracy: float) -> float:
    """Linguistic minus control accuracy; high values mean generalization
    rather than memorization."""
    for value in (linguistic_accuracy, control_accuracy):
        if not 0.0 <= value <= 1.0:
            raise ValueError("accuracies must lie in [0, 1]")
    return linguistic_accuracy - control_accuracy


def separability_gap(nonlinear_accuracy: float, linear_accuracy: float) -> float:
    """Nonlinear minus linear accuracy; large positive values mean the signal
    is buried in nonlinear structure."""
    for value in (nonlinear_accuracy, linear_accuracy):
        if not 0.0 <= value <= 1.0:
            raise ValueError("accuracies must lie in [0, 1]")
    return nonlinear_accuracy - linear_accuracy


def layer_trend(accuracies: Sequence[float]) -> TrendFit:
    """OLS of accuracy on normalized depth t = layer / (L - 1).

    R^2 is 1 - SS_res/SS_tot, and defined as 1 when the accuracies are
    constant (zero total variance, zero residuals).
    """
    y = np.asarray(accuracies, dtype=np.float64)
    if y.ndim != 1 or len(y) < 2:
        raise ValueError("need at least 2 per-layer accuracies")
    t = np.arange(len(y), dtype=np.float64) / (len(y) - 1)
    t_mean, y_mean = t.mean(), y.mean()
    slope = float(np.sum((t - t_mean) * (y - y_mean)) / np.sum((t - t_mean) ** 2))
    intercept = y_mean - slope * t_mean
    residuals = y - (slope * t + intercept)
    ss_res = float(np.sum(residuals**2))
    ss_tot = float(np.sum((y - y_mean) ** 2))
    if ss_tot == 0.0:
        return TrendFit(slope=slope, r_squared=1.0)
    return TrendFit(slope=slope, r_squared=min(1.0, max(0.0, 1.0 - ss_res / ss_tot)))


def group_breakdown(
    preds_by_layer: Sequence[Sequence], gold: Sequence, groups: Sequence
) -> dict:
    """Per group: accuracy within the group at each layer, averaged over
    layers."""
    gold = np.asarray(gold)
    groups = np.asarray(groups)
    if groups.shape != gold.shape:
        raise ValueError("one group per example required")
    group_names = sorted(set(groups.tolist()))
    if not group_names:
        raise ValueError("empty group set")
    out = {}
    for name in group_names:
        mask = groups == name
        per_layer = [
            float(np.mean(np.asarray(pred)[mask] == gold[mask]))
            for pred in preds_by_layer
        ]
        out[name] = float(np.mean(per_layer))
    return out


def atomic_write_text(path, text: str) -> None:
    """Write a whole file via temp-and-rename so readers never see partials."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def format_float(value) -> str:
    return "" if value is None else f"{value:.6f}"


def write_report_csv(path, rows: Sequence[Mapping]) -> None:
    """One CSV per (model, task, family): layer, accuracy, macro_f1,
    selectivity, gap.  Body is byte-identical across reruns."""
    lines = ["layer,accuracy,macro_f1,selectivity,gap"]
    for row in rows:
        lines.append(
            ",".join(
                [
                    str(row["layer"]),
                    format_float(row["accuracy"]),
                    format_float(row["macro_f1"]),
                    format_float(row.get("selectivity")),
                    format_float(row.get("gap")),
                ]
            )
        )
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_summary_json(path, payload: Mapping) -> None:
    atomic_write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def read_csv_rows(path) -> list[dict]:
    with open(path, encoding="utf-8", newline="") as f:
        return list(csv.DictReader(f))
