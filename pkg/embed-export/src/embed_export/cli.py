"""embed-export command line: corpus jsonl in, EMB1 plus manifest out."""
from __future__ import annotations

import argparse
import sys

from .encoders import make_encoder
from .errors import ExportError
from .exporter import export_embeddings


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="embed-export",
        description="Embed every paragraph of a jsonl corpus into an EMB1 vector file.",
    )
    parser.add_argument("--input", required=True, help="corpus jsonl path")
    parser.add_argument("--output", required=True, help="EMB1 output path")
    parser.add_argument(
        "--model",
        required=True,
        help="sentence-embedding model name, or hashed:<dim> for a deterministic stand-in",
    )
    parser.add_argument(
        "--manifest",
        default=None,
        help="manifest path (default: <output>.manifest.json)",
    )
    parser.add_argument("--batch-size", type=int, default=32)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        manifest = export_embeddings(
            args.input,
            make_encoder(args.model),
            args.output,
            manifest_path=args.manifest,
            batch_size=args.batch_size,
        )
    except ExportError as exc:
        print(f"embed-export: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"embed-export: {exc}", file=sys.stderr)
        return 2
    print(
        f"wrote {manifest.paragraphs} vectors (dim {manifest.dimension}, "
        f"{manifest.truncated} truncated) to {args.output}"
    )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
