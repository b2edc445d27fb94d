"""Desk-scale reproduction on GPT-2-small over the GUM-derived dataset.

These are the release criteria that need real resources: the UD English GUM
corpus on disk and a loadable GPT-2-small checkpoint.  They are skipped
unless LAYERPROBE_FULLSCALE=1 (extraction takes 30-60 minutes on CPU,
probing under 30).  Each criterion prints its own PASS line.

Resources:
  - corpus: $LAYERPROBE_GUM_DIR or <primary>/tests/data/gum/*.conllu
  - model:  $LAYERPROBE_GPT2 (local checkpoint path) or the hub id "gpt2"
  - workdir (reused across runs, resumable): $LAYERPROBE_REPRO_DIR
"""

import os
import tempfile
from pathlib import Path

import pytest
import yaml

pytestmark = pytest.mark.fullscale

THIS_DIR = Path(__file__).parent
PRIMARY_TESTS = THIS_DIR.parent.parent / "tests"


def find_gum_corpus():
    candidates = []
    env = os.environ.get("LAYERPROBE_GUM_DIR")
    if env:
        candidates.append(Path(env))
    candidates.append(PRIMARY_TESTS / "data" / "gum")
    for directory in candidates:
        if directory.is_dir():
            files = sorted(directory.glob("*.conllu"))
            if files:
                return files
    return None


def resolve_gpt2():
    model_id = os.environ.get("LAYERPROBE_GPT2", "gpt2")
    try:
        from transformers import AutoTokenizer

        AutoTokenizer.from_pretrained(model_id, use_fast=True)
        return model_id
    except Exception as err:
        pytest.skip(f"GPT-2 checkpoint unavailable ({err}); no network here")


@pytest.fixture(scope="module")
def repro():
    """One full pipeline run: ingest, extract, probe, dims.  Heavy."""
    if os.environ.get("LAYERPROBE_FULLSCALE") != "1":
        pytest.skip("set LAYERPROBE_FULLSCALE=1 to run the GPT-2 reproduction")
    files = find_gum_corpus()
    if files is None:
        pytest.skip("UD English GUM corpus not found (see module docstring)")
    model_id = resolve_gpt2()

    from actextract.cli import main as actextract_main
    from layerprobe.cli import main as layerprobe_main
    from layerprobe.metrics import read_csv_rows

    workdir = Path(
        os.environ.get("LAYERPROBE_REPRO_DIR", tempfile.mkdtemp(prefix="repro-"))
    )
    workdir.mkdir(parents=True, exist_ok=True)
    out = workdir / "out"
    store = workdir / "gpt2.store"
    config = {
        "output": str(out),
        "seeds": {"split": 0, "control": 0, "probe": 0},
        "dataset": {"conllu": [str(f) for f in files]},
        "models": [{"id": "gpt2", "store": str(store)}],
        "tasks": ["inflection", "lemma"],
        "families": ["linear"],
        "grids": {"linear": [0.01, 0.1, 1.0, 10.0, 100.0]},
        "thresholds": [50, 70, 90, 100],
    }
    config_path = workdir / "run.yaml"
    config_path.write_text(yaml.safe_dump(config))

    assert layerprobe_main(["ingest", "--config", str(config_path)]) == 0
    if not store.exists():
        assert (
            actextract_main(
                [
                    "extract",
                    "--model", model_id,
                    "--manifest", str(out / "manifest.jsonl"),
                    "--out", str(store),
                ]
            )
            == 0
        )
    assert layerprobe_main(["probe", "--config", str(config_path)]) == 0
    assert layerprobe_main(["dims", "--config", str(config_path)]) == 0

    return {
        "out": out,
        "model_id": model_id,
        "manifest": out / "manifest.jsonl",
        "inflection": read_csv_rows(out / "reports" / "gpt2__inflection__linear.csv"),
        "lemma": read_csv_rows(out / "reports" / "gpt2__lemma__linear.csv"),
    }


def test_inflection_accuracy_band(repro):
    """Linear inflection probes stay in the high band at every layer."""
    accs = [float(r["accuracy"]) for r in repro["inflection"]]
    assert len(accs) == 13  # embedding output + 12 blocks
    assert min(accs) >= 0.88, f"per-layer accuracies {accs}"
    print(f"REPRODUCTION inflection-accuracy: PASS (min {min(accs):.3f})")


def test_lexeme_trend_slope(repro):
    """Lexeme linear accuracy declines with depth at the published rate."""
    from layerprobe.metrics import layer_trend

    accs = [float(r["accuracy"]) for r in repro["lemma"]]
    fit = layer_trend(accs)
    assert abs(fit.slope - (-0.261)) <= 0.10, fit
    assert fit.r_squared >= 0.85, fit
    print(f"REPRODUCTION lexeme-trend: PASS (slope {fit.slope:.3f}, R2 {fit.r_squared:.3f})")


def test_middle_layer_collapse(repro):
    """GPT-2's middle layer compresses to (near) one component at ID50."""
    from layerprobe.metrics import read_csv_rows

    rows = read_csv_rows(repro["out"] / "dims" / "gpt2__profile.csv")
    by_layer = {}
    for row in rows:
        if int(row["threshold"]) == 50:
            by_layer[int(row["layer"])] = int(row["id"])
    mid = max(by_layer) // 2 if 0 in by_layer else len(by_layer) // 2
    assert by_layer[mid] <= 2, by_layer
    print(f"REPRODUCTION middle-layer-id50: PASS (ID50[{mid}] = {by_layer[mid]})")


def test_tokenization_statistics(repro):
    """Tokens per target word match the published GPT-2 figures under the
    matching counting convention (GPT-2 adds no special tokens, so both
    conventions coincide)."""
    from actextract.stats import tokenization_stats

    stats = tokenization_stats(repro["manifest"], repro["model_id"])
    aligned = stats["aligned"]
    assert abs(aligned["avg_tokens_per_word"] - 1.52) <= 0.005, aligned
    assert abs(aligned["percent_multitoken"] - 42.25) <= 0.005, aligned
    print(
        "REPRODUCTION tokenization-stats: PASS "
        f"(avg {aligned['avg_tokens_per_word']:.2f}, "
        f"{aligned['percent_multitoken']:.2f}% multitoken)"
    )


def test_selectivity_direction(repro):
    """Inflection selectivity is strong in late layers; lexeme selectivity
    stays near zero (memorization)."""
    import numpy as np

    sel_inf = [float(r["selectivity"]) for r in repro["inflection"]]
    sel_lem = [float(r["selectivity"]) for r in repro["lemma"]]
    last_third = len(sel_inf) - len(sel_inf) // 3
    assert np.mean(sel_inf[last_third:]) >= 0.25, sel_inf
    assert -0.1 <= np.mean(sel_lem) <= 0.1, sel_lem
    print(
        "REPRODUCTION selectivity-direction: PASS "
        f"(late inflection {np.mean(sel_inf[last_third:]):.3f}, "
        f"lexeme {np.mean(sel_lem):.3f})"
    )
