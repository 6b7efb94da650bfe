"""Layered proximity graph for approximate cosine nearest-neighbor search.

Nodes are inserted one at a time. Each node draws a top layer from a
geometric-like distribution with multiplier 1/ln(M); layer 0 holds every
node with up to 2M links, upper layers cap links at M. Queries descend
greedily through the upper layers, then run a beam search of width ``ef``
on layer 0. Distance is 1 - cosine over unit-normalized vectors.

Filters never prune the traversal: excluded or rejected nodes are still
walked through, they just cannot occupy result slots.
"""
from __future__ import annotations

import heapq
import logging
import math
import random
import struct
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .corpus import parent_of
from .errors import DimensionError, UnknownIdError, WorkbenchError
from .ranking import SearchHit

log = logging.getLogger(__name__)

_MAGIC = b"HNS1"
_VERSION = 1
_NO_ENTRY = 0xFFFFFFFF


class HnswIndex:
    def __init__(self, dim: int, m: int = 16, ef_construction: int = 200, level_seed: int = 0):
        if dim < 1:
            raise ValueError("dim must be >= 1")
        if m < 2:
            raise ValueError("m must be >= 2")
        if ef_construction < 1:
            raise ValueError("ef_construction must be >= 1")
        self.dim = dim
        self.m = m
        self.ef_construction = ef_construction
        self.level_seed = level_seed
        self._mult = 1.0 / math.log(m)
        self._rng = random.Random(level_seed)
        self._ids: list[str] = []
        self._parents: list[str] = []
        self._index: dict[str, int] = {}
        self._levels: list[int] = []
        # per node: per layer 0..level, neighbor node indexes
        self._links: list[list[list[int]]] = []
        self._entry = -1
        self._max_level = -1
        self._unit = np.zeros((0, dim), dtype=np.float32)
        self._count = 0

    def __len__(self) -> int:
        return self._count

    def __contains__(self, unit_id: str) -> bool:
        return unit_id in self._index

    @property
    def ids(self) -> list[str]:
        return list(self._ids)

    def vector(self, unit_id: str) -> np.ndarray:
        try:
            idx = self._index[unit_id]
        except KeyError:
            raise UnknownIdError(f"unit {unit_id!r} not in index") from None
        return self._unit[idx].copy()

    def _grow(self) -> None:
        if self._count < self._unit.shape[0]:
            return
        capacity = max(16, self._unit.shape[0] * 2)
        grown = np.zeros((capacity, self.dim), dtype=np.float32)
        grown[: self._count] = self._unit[: self._count]
        self._unit = grown

    def add(self, unit_id: str, vector: np.ndarray) -> None:
        if unit_id in self._index:
            raise WorkbenchError(f"unit {unit_id!r} already indexed")
        vector = np.asarray(vector, dtype=np.float64).ravel()
        if vector.shape[0] != self.dim:
            raise DimensionError(
                f"vector dim {vector.shape[0]} does not match index dim {self.dim}"
            )
        norm = np.linalg.norm(vector)
        if norm == 0.0:
            raise DimensionError(f"zero-norm vector for {unit_id!r}")
        unit = (vector / norm).astype(np.float32)
        level = int(-math.log(1.0 - self._rng.random()) * self._mult)

        node = self._count
        self._grow()
        self._unit[node] = unit
        self._ids.append(unit_id)
        self._parents.append(parent_of(unit_id))
        self._index[unit_id] = node
        self._levels.append(level)
        self._links.append([[] for _ in range(level + 1)])
        self._count += 1

        if self._entry < 0:
            self._entry = node
            self._max_level = level
            return

        query = self._unit[node]
        entry_dist = 1.0 - float(np.dot(self._unit[self._entry], query))
        eps = [(entry_dist, self._entry)]
        for layer in range(self._max_level, level, -1):
            eps = self._search_layer(query, eps, 1, layer)
        for layer in range(min(level, self._max_level), -1, -1):
            found = self._search_layer(query, eps, self.ef_construction, layer)
            cap = self.m * 2 if layer == 0 else self.m
            neighbors = self._select_neighbors(sorted(found), cap, fill=True)
            self._links[node][layer] = list(neighbors)
            for other in neighbors:
                links = self._links[other][layer]
                links.append(node)
                if len(links) > cap:
                    self._shrink(other, layer, cap)
            eps = found
        if level > self._max_level:
            self._entry = node
            self._max_level = level

    def _select_neighbors(
        self, candidates: list[tuple[float, int]], m: int, fill: bool = False
    ) -> list[int]:
        """Diversity-pruned neighbor choice from distance-sorted candidates.

        A candidate is kept only if it is closer to the query than to every
        neighbor already kept; without this pruning, clustered links collapse
        into one region and long-range reachability suffers. With ``fill``,
        pruned candidates pad the result back up to m, nearest first.
        """
        if fill and len(candidates) <= m:
            return [node for _, node in candidates]
        count = len(candidates)
        dists = [d for d, _ in candidates]
        nodes = np.fromiter((n for _, n in candidates), dtype=np.intp, count=count)
        vecs = self._unit[nodes]
        pairwise = 1.0 - vecs @ vecs.T
        # nearest selected neighbor per candidate, updated as the set grows
        nearest = np.full(count, np.inf)
        selected: list[int] = []
        pruned: list[int] = []
        for i in range(count):
            if len(selected) == m:
                break
            if nearest[i] < dists[i]:
                pruned.append(i)
                continue
            selected.append(i)
            np.minimum(nearest, pairwise[i], out=nearest)
        if fill and len(selected) < m:
            selected.extend(pruned[: m - len(selected)])
        return [int(nodes[i]) for i in selected]

    def _shrink(self, node: int, layer: int, cap: int) -> None:
        links = self._links[node][layer]
        arr = np.fromiter(links, dtype=np.intp, count=len(links))
        dists = 1.0 - self._unit[arr] @ self._unit[node]
        order = np.lexsort((arr, dists))
        ranked = [(float(dists[i]), int(arr[i])) for i in order]
        self._links[node][layer] = self._select_neighbors(ranked, cap)

    def _search_layer(
        self,
        query: np.ndarray,
        entry_points: list[tuple[float, int]],
        ef: int,
        layer: int,
        allowed: Callable[[int], bool] | None = None,
    ) -> list[tuple[float, int]]:
        """Beam search one layer; returns up to ef (distance, node) pairs.

        ``allowed`` gates membership in the result beam only; every reachable
        node still participates in traversal.
        """
        visited = np.zeros(self._count, dtype=bool)
        candidates: list[tuple[float, int]] = []
        results: list[tuple[float, int]] = []  # max-heap via negated distance
        for dist, node in entry_points:
            if visited[node]:
                continue
            visited[node] = True
            heapq.heappush(candidates, (dist, node))
            if allowed is None or allowed(node):
                heapq.heappush(results, (-dist, node))
        while candidates:
            dist, node = heapq.heappop(candidates)
            if len(results) >= ef and dist > -results[0][0]:
                break
            links = self._links[node][layer]
            arr = np.fromiter(links, dtype=np.intp, count=len(links))
            arr = arr[~visited[arr]]
            if not arr.shape[0]:
                continue
            visited[arr] = True
            dists = 1.0 - self._unit[arr] @ query
            bound = -results[0][0] if len(results) >= ef else math.inf
            for neighbor, d in zip(arr.tolist(), dists.tolist()):
                if d < bound or len(results) < ef:
                    heapq.heappush(candidates, (d, neighbor))
                    if allowed is None or allowed(neighbor):
                        heapq.heappush(results, (-d, neighbor))
                        if len(results) > ef:
                            heapq.heappop(results)
                        bound = -results[0][0] if len(results) >= ef else math.inf
        return [(-negdist, node) for negdist, node in results]

    def search(
        self,
        query: np.ndarray,
        k: int = 10,
        ef: int = 100,
        excluded: frozenset[str] | set[str] = frozenset(),
        predicate: Callable[[str], bool] | None = None,
    ) -> list[SearchHit]:
        """Approximate top-k by cosine; ties break by ascending unit id."""
        if k < 1:
            raise ValueError("k must be >= 1")
        if self._count == 0:
            return []
        query = np.asarray(query, dtype=np.float64).ravel()
        if query.shape[0] != self.dim:
            raise DimensionError(
                f"query dim {query.shape[0]} does not match index dim {self.dim}"
            )
        norm = np.linalg.norm(query)
        if norm == 0.0:
            raise DimensionError("cannot search with a zero-norm query")
        unit_query = (query / norm).astype(np.float32)

        allowed: Callable[[int], bool] | None = None
        if excluded or predicate is not None:
            def allowed(node: int) -> bool:
                if self._parents[node] in excluded:
                    return False
                return predicate is None or predicate(self._ids[node])

        entry_dist = 1.0 - float(np.dot(self._unit[self._entry], unit_query))
        eps = [(entry_dist, self._entry)]
        for layer in range(self._max_level, 0, -1):
            eps = self._search_layer(unit_query, eps, 1, layer)
        found = self._search_layer(unit_query, eps, max(ef, k), 0, allowed)
        found.sort(key=lambda item: (item[0], self._ids[item[1]]))
        return [
            SearchHit(unit_id=self._ids[node], score=1.0 - dist, rank=rank)
            for rank, (dist, node) in enumerate(found[:k], start=1)
        ]

    # -- persistence ------------------------------------------------------

    def save(self, path: str | Path) -> None:
        with open(path, "wb") as out:
            out.write(_MAGIC)
            out.write(struct.pack("<B", _VERSION))
            out.write(
                struct.pack(
                    "<IIIq", self.dim, self.m, self.ef_construction, self.level_seed
                )
            )
            entry = self._entry if self._entry >= 0 else _NO_ENTRY
            out.write(struct.pack("<III", self._count, entry, self._max_level + 1))
            for unit_id in self._ids:
                raw = unit_id.encode("utf-8")
                if len(raw) > 0xFFFF:
                    raise WorkbenchError(f"id too long to serialize: {unit_id[:40]!r}...")
                out.write(struct.pack("<H", len(raw)))
                out.write(raw)
            out.write(np.asarray(self._levels, dtype="<u4").tobytes())
            out.write(self._unit[: self._count].astype("<f4").tobytes())
            for node in range(self._count):
                for layer_links in self._links[node]:
                    out.write(struct.pack("<I", len(layer_links)))
                    out.write(np.asarray(layer_links, dtype="<u4").tobytes())

    @classmethod
    def load(cls, path: str | Path) -> "HnswIndex":
        with open(path, "rb") as handle:
            data = handle.read()
        if data[:4] != _MAGIC:
            raise WorkbenchError(f"{path}: not an HNS1 index file")
        offset = 4
        (version,) = struct.unpack_from("<B", data, offset)
        offset += 1
        if version != _VERSION:
            raise WorkbenchError(f"{path}: unsupported index version {version}")
        dim, m, ef_construction, level_seed = struct.unpack_from("<IIIq", data, offset)
        offset += 20
        count, entry, max_level_plus = struct.unpack_from("<III", data, offset)
        offset += 12
        index = cls(dim, m, ef_construction, level_seed)
        for _ in range(count):
            (id_len,) = struct.unpack_from("<H", data, offset)
            offset += 2
            unit_id = data[offset : offset + id_len].decode("utf-8")
            offset += id_len
            index._index[unit_id] = len(index._ids)
            index._ids.append(unit_id)
            index._parents.append(parent_of(unit_id))
        levels = np.frombuffer(data, dtype="<u4", count=count, offset=offset)
        offset += 4 * count
        index._levels = [int(level) for level in levels]
        vectors = np.frombuffer(data, dtype="<f4", count=count * dim, offset=offset)
        offset += 4 * count * dim
        index._unit = vectors.reshape(count, dim).copy()
        index._count = count
        for node in range(count):
            node_links = []
            for _ in range(index._levels[node] + 1):
                (n_links,) = struct.unpack_from("<I", data, offset)
                offset += 4
                links = np.frombuffer(data, dtype="<u4", count=n_links, offset=offset)
                offset += 4 * n_links
                node_links.append([int(n) for n in links])
            index._links.append(node_links)
        index._entry = -1 if entry == _NO_ENTRY else int(entry)
        index._max_level = max_level_plus - 1
        # Replay the level draws so later inserts continue the original stream.
        for _ in range(count):
            index._rng.random()
        return index


def build_hnsw(
    items: Iterable[tuple[str, np.ndarray]] | Sequence[tuple[str, np.ndarray]],
    dim: int,
    m: int = 16,
    ef_construction: int = 200,
    level_seed: int = 0,
) -> HnswIndex:
    index = HnswIndex(dim, m, ef_construction, level_seed)
    for unit_id, vector in items:
        index.add(unit_id, vector)
    return index
