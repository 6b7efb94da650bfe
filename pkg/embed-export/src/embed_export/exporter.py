"""EMB1 export: one vector per paragraph, plus a JSON manifest side file.

The binary layout matches the retrieval engine's embedding store loader:
magic ``EMB1``, u32 little-endian dimension, then per record a u16
little-endian id length, the UTF-8 id bytes, and ``dim`` float32
little-endian values.
"""
from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Protocol, Sequence

import numpy as np

from .errors import ExportError
from .grouping import ParagraphText, iter_paragraphs

MAGIC = b"EMB1"


class Encoder(Protocol):
    """Anything that turns texts into fixed-width float vectors."""

    name: str
    dim: int

    def encode(self, texts: Sequence[str]) -> np.ndarray: ...


@dataclass(frozen=True)
class ExportManifest:
    model: str
    dimension: int
    paragraphs: int
    truncated: int
    corpus_sha256: str

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"


def _file_sha256(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _encode_batch(encoder: Encoder, batch: list[ParagraphText]) -> np.ndarray:
    vectors = np.asarray(encoder.encode([p.embedder_text() for p in batch]))
    if vectors.ndim != 2 or vectors.shape[0] != len(batch):
        raise ExportError(
            f"encoder returned shape {vectors.shape} for a batch of {len(batch)}"
        )
    if vectors.shape[1] != encoder.dim:
        raise ExportError(
            f"encoder {encoder.name!r} declares dimension {encoder.dim} "
            f"but produced {vectors.shape[1]}"
        )
    return vectors.astype("<f4")


def export_embeddings(
    corpus_path: str | Path,
    encoder: Encoder,
    out_path: str | Path,
    manifest_path: str | Path | None = None,
    batch_size: int = 32,
) -> ExportManifest:
    """Embed every paragraph of a jsonl corpus into an EMB1 file.

    Returns the manifest, which is also written next to the output
    (``<out_path>.manifest.json`` unless overridden).
    """
    if batch_size < 1:
        raise ExportError("batch_size must be >= 1")
    if manifest_path is None:
        manifest_path = Path(f"{out_path}.manifest.json")

    paragraphs = 0
    truncated = 0
    try:
        with open(out_path, "wb") as out:
            out.write(MAGIC)
            out.write(struct.pack("<I", encoder.dim))
            batch: list[ParagraphText] = []

            def flush() -> None:
                nonlocal paragraphs
                if not batch:
                    return
                vectors = _encode_batch(encoder, batch)
                for para, vector in zip(batch, vectors):
                    raw = para.para_id.encode("utf-8")
                    if len(raw) > 0xFFFF:
                        raise ExportError(f"paragraph id too long: {para.para_id[:40]!r}...")
                    out.write(struct.pack("<H", len(raw)))
                    out.write(raw)
                    out.write(vector.tobytes())
                paragraphs += len(batch)
                batch.clear()

            for para in iter_paragraphs(corpus_path):
                if para.truncated:
                    truncated += 1
                batch.append(para)
                if len(batch) >= batch_size:
                    flush()
            flush()
    except Exception:
        # never leave a half-written vector file behind
        Path(out_path).unlink(missing_ok=True)
        raise

    manifest = ExportManifest(
        model=encoder.name,
        dimension=encoder.dim,
        paragraphs=paragraphs,
        truncated=truncated,
        corpus_sha256=_file_sha256(corpus_path),
    )
    with open(manifest_path, "w") as handle:
        handle.write(manifest.to_json())
    return manifest
