"""Encoder construction. Model runtimes are imported lazily so that the
package (and its tests) work on machines without them.
"""
from __future__ import annotations

import hashlib
from typing import Sequence

import numpy as np

from .errors import ExportError


class HashedEncoder:
    """Deterministic stand-in encoder: seeded Gaussian vector per text.

    Useful for wiring up an export pipeline before the real model is
    available; the vectors carry no semantics beyond text identity.
    """

    def __init__(self, dim: int):
        if dim < 1:
            raise ExportError("encoder dimension must be >= 1")
        self.name = f"hashed:{dim}"
        self.dim = dim

    def encode(self, texts: Sequence[str]) -> np.ndarray:
        rows = []
        for text in texts:
            seed = int.from_bytes(hashlib.blake2s(text.encode("utf-8")).digest()[:8], "little")
            vector = np.random.default_rng(seed).standard_normal(self.dim)
            norm = np.linalg.norm(vector)
            rows.append(vector / norm if norm > 0 else vector)
        return np.asarray(rows, dtype=np.float32)


class SentenceModelEncoder:
    """Mean-pooled sentence-embedding model via sentence-transformers."""

    def __init__(self, model_name: str):
        try:
            from sentence_transformers import SentenceTransformer
        except ImportError as exc:
            raise ExportError(
                "sentence-transformers is not installed; "
                "install the [model] extra or use a hashed:<dim> encoder"
            ) from exc
        try:
            self._model = SentenceTransformer(model_name)
        except Exception as exc:
            raise ExportError(f"could not load model {model_name!r}: {exc}") from exc
        dim = self._model.get_sentence_embedding_dimension()
        if not dim:
            raise ExportError(f"model {model_name!r} reports no embedding dimension")
        self.name = model_name
        self.dim = int(dim)

    def encode(self, texts: Sequence[str]) -> np.ndarray:
        return np.asarray(
            self._model.encode(list(texts), show_progress_bar=False), dtype=np.float32
        )


def make_encoder(spec: str):
    """Build an encoder from a CLI spec: ``hashed:<dim>`` or a model name."""
    if spec.startswith("hashed:"):
        try:
            dim = int(spec.split(":", 1)[1])
        except ValueError as exc:
            raise ExportError(f"bad hashed encoder spec {spec!r}") from exc
        return HashedEncoder(dim)
    return SentenceModelEncoder(spec)
