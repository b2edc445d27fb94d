"""The whole pipeline through the CLI, on synthetic data.

Generates a small CoNLL-U corpus, ingests it, fabricates an aligned
activation store whose deeper layers encode the inflection class, then runs
probe, dims, analogy, and report exactly as one would against real model
dumps.  Inspect the output directory printed at the end.
"""

import json
import pathlib
import tempfile

import numpy as np
import yaml

from layerprobe import corpus, tensorstore
from layerprobe.cli import main

LEMMAS = ["walk", "jump", "sing", "read", "cook", "play"]
RECIPES = [
    ("NOUN", "Number=Sing", "s"),
    ("VERB", "Tense=Past|VerbForm=Fin", "ed"),
    ("ADJ", "Degree=Cmp", "er"),
]


def synthetic_corpus(n_per_class=40):
    lines, sent = [], 0
    letters = "abcdefghijklmnopqrstuvwxyz"
    for upos, feats, ending in RECIPES:
        for i in range(n_per_class):
            lemma = LEMMAS[i % len(LEMMAS)]
            form = f"{lemma}{ending}{letters[i % 26]}"
            sent += 1
            lines += [f"# sent_id = demo-{sent}",
                      f"1\t{form}\t{lemma}\t{upos}\t_\t{feats}\t0\troot\t_\t_", ""]
    return "\n".join(lines) + "\n"


def fabricate_store(manifest_path, store_path, d=12, layer_count=4):
    rows = corpus.load_manifest(manifest_path)
    classes = sorted({r["inflection"] for r in rows})
    rng = np.random.default_rng(0)
    m = len(rows)
    signal = np.zeros((m, d), dtype=np.float32)
    for i, row in enumerate(rows):
        signal[i, classes.index(row["inflection"])] = 4.0
    layers = []
    for layer in range(layer_count):
        # The signal-to-noise ratio grows with depth.
        mix = layer / (layer_count - 1)
        layers.append(
            (mix * signal + (1.2 - mix) * rng.standard_normal((m, d))).astype(np.float32)
        )
    vocab = ["man", "king", "woman", "queen", "apple"]
    table = tensorstore.EmbeddingTable(
        vectors=rng.standard_normal((len(vocab), d)).astype(np.float32),
        pieces=tuple(vocab),
        encodings={w: {"subtoken": [i], "wholeword": [i]} for i, w in enumerate(vocab)},
    )
    header = tensorstore.StoreHeader(
        model_id="demo",
        layer_count=layer_count,
        example_count=m,
        hidden_dim=d,
        manifest_digest=tensorstore.manifest_digest_of_file(manifest_path),
    )
    tensorstore.write_store(header, layers, store_path, embedding=table)


with tempfile.TemporaryDirectory() as tmp:
    root = pathlib.Path(tmp)
    (root / "corpus.conllu").write_text(synthetic_corpus(), encoding="utf-8")
    (root / "queries.csv").write_text(
        "a,b,c,expected\nman,king,woman,queen\nking,man,queen,woman\n"
    )
    out = root / "out"
    config = {
        "output": str(out),
        "seeds": {"split": 0, "control": 1, "probe": 2},
        "dataset": {"conllu": [str(root / "corpus.conllu")]},
        "models": [{"id": "demo", "store": str(root / "demo.store")}],
        "tasks": ["inflection"],
        "families": ["linear", "mlp"],
        "grids": {"linear": [0.1, 10.0]},
        "mlp_base": {"epochs": 5, "batch_size": 32, "learning_rate": 0.01},
        "thresholds": [50, 90, 100],
        "analogy": {"queries": str(root / "queries.csv")},
    }
    (root / "run.yaml").write_text(yaml.safe_dump(config))

    print("\n$ layerprobe ingest --config run.yaml")
    assert main(["ingest", "--config", str(root / "run.yaml")]) == 0

    # Stand-in for the extractor: an activation store aligned to the manifest.
    fabricate_store(out / "manifest.jsonl", root / "demo.store")

    for command in ("probe", "dims", "analogy", "report"):
        print(f"\n$ layerprobe {command} --config run.yaml")
        code = main([command, "--config", str(root / "run.yaml")])
        assert code == 0, f"{command} exited {code}"

    print("\nreport CSV (accuracy should rise with depth):")
    report = out / "reports" / "demo__inflection__linear.csv"
    print(report.read_text())
    print("outputs written under:", sorted(p.name for p in out.iterdir()))
