"""Command-line entry point.

Subcommands mirror the analysis stages: `ingest` (corpus -> manifest, split,
controls), `probe` (layer x task x family sweep), `dims` (intrinsic
dimensionality), `analogy` (tokenization study), `report` (plot-data
bundles).

Exit codes: 0 success, 2 config error, 3 data/alignment error, 4 training
divergence.
"""

from __future__ import annotations

import argparse
import sys

from layerprobe import pipeline
from layerprobe.config import (
    ConfigError,
    apply_seed_overrides,
    load_config,
    override_output,
)
from layerprobe.corpus import ConlluParseError
from layerprobe.probes.mlp import DivergenceError
from layerprobe.probes.tuning import ProtocolError
from layerprobe.tensorstore import StoreError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_DIVERGENCE = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="layerprobe",
        description="Layer-wise representation probing pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("ingest", "parse CoNLL-U inputs into manifest, split, and control mappings"),
        ("probe", "train and evaluate probes for every layer, task, and family"),
        ("dims", "per-layer PCA spectra and intrinsic dimensionality profiles"),
        ("analogy", "analogy-completion ranks for both composition modes"),
        ("report", "aggregate report CSVs into plot-data bundles"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="run configuration file")
        p.add_argument("--out", default=None, help="override the output directory")
        p.add_argument("--workers", type=int, default=None, help="worker pool size")
        p.add_argument(
            "--seed-override",
            action="append",
            default=[],
            metavar="K=V",
            help="override a seed, e.g. split=1 (repeatable)",
        )
        p.add_argument(
            "--resume",
            action="store_true",
            help="reuse completed probe cells from a previous run",
        )
    return parser


def _load(args):
    config = load_config(args.config)
    config = apply_seed_overrides(config, args.seed_override)
    if args.out:
        config = override_output(config, args.out)
    return config


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    config = _load(args)
    if args.command == "ingest":
        pipeline.ingest_run(config)
    elif args.command == "probe":
        pipeline.probe_run(config, workers=args.workers, resume=True)
    elif args.command == "dims":
        pipeline.dims_run(config)
    elif args.command == "analogy":
        pipeline.analogy_run(config)
    elif args.command == "report":
        pipeline.report_run(config)
    return EXIT_OK


def main(argv=None) -> int:
    try:
        return run(argv)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (StoreError, ConlluParseError, ProtocolError, FileNotFoundError) as err:
        print(f"data error: {err}", file=sys.stderr)
        return EXIT_DATA
    except DivergenceError as err:
        print(f"training divergence: {err}", file=sys.stderr)
        return EXIT_DIVERGENCE


if __name__ == "__main__":
    sys.exit(main())
