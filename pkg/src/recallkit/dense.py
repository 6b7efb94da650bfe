"""Dense vector search: embedding storage, cosine scoring, exact brute force.

Vectors are float32 at rest. Similarity math accumulates in float64 so that
equal inputs score identically regardless of summation order.
"""
from __future__ import annotations

import hashlib
import json
import logging
import struct
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .corpus import parent_of
from .errors import DimensionError, UnknownIdError, WorkbenchError
from .ranking import SearchHit
from .text import PIPELINE_EMBEDDING, tokenize

log = logging.getLogger(__name__)

_EMB_MAGIC = b"EMB1"


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity of two 1-d vectors; zero-norm input is an error."""
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise DimensionError(f"vector dimensions differ: {a.shape[0]} vs {b.shape[0]}")
    norm_a = float(np.linalg.norm(a))
    norm_b = float(np.linalg.norm(b))
    if norm_a == 0.0 or norm_b == 0.0:
        raise DimensionError("cosine of a zero-norm vector is undefined")
    return float(np.dot(a, b) / (norm_a * norm_b))


def hash_embed(text: str, dim: int = 64, seed: int = 0) -> np.ndarray:
    """Deterministic feature-hashing sentence embedding.

    Each token lands in one of ``dim`` buckets with a +-1 sign, both taken
    from a keyed blake2b digest, and the summed vector is L2-normalized.
    Useful as a lightweight stand-in for a learned encoder.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    tokens = tokenize(text, PIPELINE_EMBEDDING)
    if not tokens:
        raise DimensionError("cannot embed text with no tokens")
    key = f"hash-embed:{seed}".encode()
    vector = np.zeros(dim, dtype=np.float64)
    for token in tokens:
        digest = hashlib.blake2b(token.lower().encode(), key=key, digest_size=8).digest()
        value = int.from_bytes(digest, "little")
        bucket = value % dim
        sign = 1.0 if (value >> 32) & 1 else -1.0
        vector[bucket] += sign
    norm = np.linalg.norm(vector)
    if norm == 0.0:
        # All token contributions cancelled; fall back to a unit basis vector
        # so downstream cosine stays well defined.
        vector[0] = 1.0
        norm = 1.0
    return (vector / norm).astype(np.float32)


def hash_embedder(dim: int = 64, seed: int = 0) -> Callable[[str], np.ndarray]:
    def embed(text: str) -> np.ndarray:
        return hash_embed(text, dim, seed)

    return embed


class EmbeddingStore:
    """Id-addressable float32 matrix with cosine search over all rows."""

    def __init__(self, ids: Sequence[str], vectors: np.ndarray):
        try:
            vectors = np.asarray(vectors, dtype=np.float32)
        except ValueError as exc:
            raise DimensionError(f"vectors do not form a matrix: {exc}") from exc
        if vectors.ndim != 2:
            raise DimensionError("vectors must form a 2-d matrix")
        if len(ids) != vectors.shape[0]:
            raise DimensionError(
                f"{len(ids)} ids but {vectors.shape[0]} vectors"
            )
        if len(set(ids)) != len(ids):
            raise WorkbenchError("duplicate ids in embedding store")
        norms = np.linalg.norm(vectors.astype(np.float64), axis=1)
        if vectors.shape[0] and not np.all(norms > 0):
            bad = [ids[i] for i in np.nonzero(norms == 0)[0][:5]]
            raise DimensionError(f"zero-norm vectors for ids {bad}")
        self._ids = list(ids)
        self._index = {unit_id: i for i, unit_id in enumerate(self._ids)}
        self._vectors = vectors
        self._unit = (vectors.astype(np.float64).T / norms).T if vectors.shape[0] else vectors.astype(np.float64)
        self._parents = [parent_of(unit_id) for unit_id in self._ids]

    @classmethod
    def from_items(cls, items: Iterable[tuple[str, np.ndarray]]) -> "EmbeddingStore":
        ids = []
        rows = []
        dim = None
        for unit_id, vector in items:
            vector = np.asarray(vector, dtype=np.float32).ravel()
            if dim is None:
                dim = vector.shape[0]
            elif vector.shape[0] != dim:
                raise DimensionError(
                    f"vector for {unit_id!r} has dim {vector.shape[0]}, expected {dim}"
                )
            ids.append(unit_id)
            rows.append(vector)
        matrix = np.vstack(rows) if rows else np.zeros((0, dim or 0), dtype=np.float32)
        return cls(ids, matrix)

    def __len__(self) -> int:
        return len(self._ids)

    def __contains__(self, unit_id: str) -> bool:
        return unit_id in self._index

    @property
    def dim(self) -> int:
        return self._vectors.shape[1]

    @property
    def ids(self) -> list[str]:
        return list(self._ids)

    def vector(self, unit_id: str) -> np.ndarray:
        return self._vectors[self._require(unit_id)].copy()

    def parent(self, unit_id: str) -> str:
        return self._parents[self._require(unit_id)]

    def _require(self, unit_id: str) -> int:
        try:
            return self._index[unit_id]
        except KeyError:
            raise UnknownIdError(f"unit {unit_id!r} not in embedding store") from None

    def search(
        self,
        query: np.ndarray,
        k: int = 10,
        excluded: frozenset[str] | set[str] = frozenset(),
        predicate: Callable[[str], bool] | None = None,
    ) -> list[SearchHit]:
        """Exact top-k by cosine; ties break by ascending unit id.

        ``excluded`` drops units whose parent document is listed; ``predicate``
        keeps only unit ids it accepts. Both filter candidates, never scores.
        """
        if k < 1:
            raise ValueError("k must be >= 1")
        query = np.asarray(query, dtype=np.float64).ravel()
        if query.shape[0] != self.dim:
            raise DimensionError(
                f"query dim {query.shape[0]} does not match store dim {self.dim}"
            )
        norm = np.linalg.norm(query)
        if norm == 0.0:
            raise DimensionError("cannot search with a zero-norm query")
        scores = self._unit @ (query / norm)
        order = np.lexsort((np.array(self._ids), -scores))
        hits = []
        for idx in order:
            unit_id = self._ids[idx]
            if self._parents[idx] in excluded:
                continue
            if predicate is not None and not predicate(unit_id):
                continue
            hits.append(SearchHit(unit_id=unit_id, score=float(scores[idx]), rank=len(hits) + 1))
            if len(hits) == k:
                break
        return hits


# -- persistence ------------------------------------------------------------


def save_embeddings(path: str | Path, store: EmbeddingStore) -> None:
    """Write the binary embedding format: magic, dim, then id/vector records."""
    with open(path, "wb") as out:
        out.write(_EMB_MAGIC)
        out.write(struct.pack("<I", store.dim))
        for unit_id in store.ids:
            raw = unit_id.encode("utf-8")
            if len(raw) > 0xFFFF:
                raise WorkbenchError(f"id too long to serialize: {unit_id[:40]!r}...")
            out.write(struct.pack("<H", len(raw)))
            out.write(raw)
            out.write(store.vector(unit_id).astype("<f4").tobytes())


def load_embeddings(path: str | Path) -> EmbeddingStore:
    with open(path, "rb") as handle:
        data = handle.read()
    if data[:4] != _EMB_MAGIC:
        raise WorkbenchError(f"{path}: not an EMB1 embedding file")
    if len(data) < 8:
        raise WorkbenchError(f"{path}: truncated embedding file")
    (dim,) = struct.unpack_from("<I", data, 4)
    offset = 8
    ids = []
    rows = []
    record_bytes = 4 * dim
    while offset < len(data):
        if offset + 2 > len(data):
            raise WorkbenchError(f"{path}: truncated record at byte {offset}")
        (id_len,) = struct.unpack_from("<H", data, offset)
        offset += 2
        if offset + id_len + record_bytes > len(data):
            raise WorkbenchError(f"{path}: truncated record at byte {offset}")
        ids.append(data[offset : offset + id_len].decode("utf-8"))
        offset += id_len
        rows.append(np.frombuffer(data, dtype="<f4", count=dim, offset=offset))
        offset += record_bytes
    matrix = np.vstack(rows) if rows else np.zeros((0, dim), dtype=np.float32)
    return EmbeddingStore(ids, matrix)


def save_embeddings_jsonl(path: str | Path, store: EmbeddingStore) -> None:
    with open(path, "w") as out:
        for unit_id in store.ids:
            vector = [float(x) for x in store.vector(unit_id)]
            out.write(json.dumps({"id": unit_id, "vector": vector}) + "\n")


def load_embeddings_jsonl(path: str | Path) -> EmbeddingStore:
    items = []
    with open(path) as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
                items.append((record["id"], np.asarray(record["vector"], dtype=np.float32)))
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise WorkbenchError(f"{path}:{lineno}: malformed vector record") from exc
    return EmbeddingStore.from_items(items)
