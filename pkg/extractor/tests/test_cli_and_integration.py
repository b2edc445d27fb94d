"""The extractor's command surface, and the full loop back into the
probing pipeline: everything crosses package boundaries through files only
(manifest JSONL in, container store out)."""

import json
import os

import pytest
import yaml

from actextract.cli import main as actextract_main
from layerprobe.cli import main as layerprobe_main


class TestCli:
    def test_extract_command(self, tiny_checkpoint, manifest_path, tmp_path, capsys):
        out = tmp_path / "cli.store"
        code = actextract_main(
            ["extract", "--model", tiny_checkpoint, "--manifest", manifest_path, "--out", str(out)]
        )
        assert code == 0
        assert out.exists()
        assert "3 layers" in capsys.readouterr().out

    def test_embeddings_command(self, tiny_checkpoint, tmp_path, capsys):
        words = tmp_path / "words.txt"
        words.write_text("cats\nwalked\nzxqv\n")
        out = tmp_path / "emb.store"
        code = actextract_main(
            ["embeddings", "--model", tiny_checkpoint, "--words", str(words), "--out", str(out)]
        )
        assert code == 0
        printed = capsys.readouterr().out
        assert "encodings" in printed
        assert "zxqv" in printed  # fallback words are flagged in the output

    def test_tokstats_command(self, tiny_checkpoint, manifest_path, capsys):
        code = actextract_main(
            ["tokstats", "--model", tiny_checkpoint, "--manifest", manifest_path]
        )
        assert code == 0
        stats = json.loads(capsys.readouterr().out)
        assert "aligned" in stats and "standalone_with_specials" in stats

    def test_bad_inputs_exit_nonzero(self, tiny_checkpoint, tmp_path, capsys):
        code = actextract_main(
            ["extract", "--model", tiny_checkpoint, "--manifest", str(tmp_path / "no.jsonl"), "--out", str(tmp_path / "x")]
        )
        assert code == 1


class TestEndToEnd:
    def test_extract_then_probe_dims_analogy(self, tiny_checkpoint, manifest_path, tmp_path):
        out_dir = os.path.dirname(manifest_path)
        store = tmp_path / "tiny.store"
        assert actextract_main(
            ["extract", "--model", tiny_checkpoint, "--manifest", manifest_path, "--out", str(store)]
        ) == 0
        words = tmp_path / "words.txt"
        words.write_text("cats\ndogs\nwalked\nslept\nfaster\nquicker\n")
        assert actextract_main(
            ["embeddings", "--model", tiny_checkpoint, "--words", str(words), "--out", str(store)]
        ) == 0

        queries = tmp_path / "queries.csv"
        queries.write_text("a,b,c,expected\ncats,walked,dogs,slept\nwalked,cats,slept,dogs\n")
        probe_out = tmp_path / "analysis"
        config = {
            "output": str(probe_out),
            "seeds": {"split": 0, "control": 0, "probe": 0},
            "dataset": {
                "manifest": manifest_path,
                "split": os.path.join(out_dir, "split.json"),
                "controls": {
                    "lemma": os.path.join(out_dir, "control_lemma.json"),
                    "inflection": os.path.join(out_dir, "control_inflection.json"),
                },
            },
            "models": [{"id": "tiny", "store": str(store)}],
            "tasks": ["inflection"],
            "families": ["linear"],
            "grids": {"linear": [0.1, 10.0]},
            "thresholds": [50, 90, 100],
            "analogy": {"queries": str(queries)},
        }
        config_path = tmp_path / "run.yaml"
        config_path.write_text(yaml.safe_dump(config))

        for command in ("probe", "dims", "analogy", "report"):
            assert layerprobe_main([command, "--config", str(config_path)]) == 0, command

        report = probe_out / "reports" / "tiny__inflection__linear.csv"
        lines = report.read_text().strip().splitlines()
        assert lines[0] == "layer,accuracy,macro_f1,selectivity,gap"
        assert len(lines) == 4  # embedding output + 2 blocks
        ranks = (probe_out / "analogy" / "tiny__ranks.csv").read_text().splitlines()
        assert len(ranks) == 3
        profile = (probe_out / "dims" / "tiny__profile.csv").read_text().splitlines()
        assert len(profile) == 1 + 3 * 3
