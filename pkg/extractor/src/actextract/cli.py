"""Extraction CLI: `extract`, `embeddings`, and `tokstats` subcommands."""

from __future__ import annotations

import argparse
import json
import sys


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="actextract",
        description="Dump transformer hidden states and embeddings for probing",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="dump per-layer hidden states for a manifest")
    p.add_argument("--model", required=True, help="model id or local checkpoint path")
    p.add_argument("--manifest", required=True, help="dataset manifest (JSON Lines)")
    p.add_argument("--out", required=True, help="output store path")
    p.add_argument("--layers", default="all", help="layer selection (only 'all')")
    p.add_argument("--batch", type=int, default=8, help="tokenizer batching hint")
    p.add_argument("--device", default="cpu")

    p = sub.add_parser("embeddings", help="export the input-embedding table")
    p.add_argument("--model", required=True)
    p.add_argument("--words", required=True, help="word list, one per line")
    p.add_argument("--out", required=True, help="store to create or merge into")
    p.add_argument("--device", default="cpu")

    p = sub.add_parser("tokstats", help="tokens-per-target-word statistics")
    p.add_argument("--model", required=True)
    p.add_argument("--manifest", required=True)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "extract":
            from actextract.core import extract_activations

            result = extract_activations(
                args.model,
                args.manifest,
                args.out,
                layers=args.layers,
                batch_size=args.batch,
                device=args.device,
            )
            print(
                f"wrote {result.store_path}: {result.layer_count} layers, "
                f"d={result.hidden_dim}, {len(result.skipped)} skipped"
            )
        elif args.command == "embeddings":
            from actextract.embeddings import export_embeddings

            with open(args.words, encoding="utf-8") as f:
                words = [line.strip() for line in f if line.strip()]
            table = export_embeddings(args.model, words, args.out, device=args.device)
            fallbacks = sorted(
                w for w, e in table.encodings.items() if e.get("fallback")
            )
            print(
                f"wrote embedding table ({table.vectors.shape[0]} x "
                f"{table.vectors.shape[1]}) with {len(table.encodings)} encodings"
            )
            if fallbacks:
                print(f"whole-word fallback (not single pieces): {', '.join(fallbacks)}")
        elif args.command == "tokstats":
            from actextract.stats import tokenization_stats

            print(json.dumps(tokenization_stats(args.manifest, args.model), indent=2))
        return 0
    except (ValueError, FileNotFoundError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
