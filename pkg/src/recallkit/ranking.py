"""Result types, paragraph-to-document aggregation, and recall curves."""
from __future__ import annotations

import csv
import logging
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence, AbstractSet

from .corpus import parent_of

log = logging.getLogger(__name__)

RANK_FIRST = "first"
RANK_COUNT = "count"
RANK_MODES = (RANK_FIRST, RANK_COUNT)

CURVE_FIELDS = ("backend", "rank_mode", "query_policy", "k", "recall", "precision", "f1")


@dataclass(frozen=True)
class SearchHit:
    """One ranked retrieval result; rank is 1-based within its result list."""

    unit_id: str
    score: float
    rank: int

    @property
    def parent_id(self) -> str:
        return parent_of(self.unit_id)


def rank_documents(parents: Sequence[str], mode: str = RANK_FIRST) -> list[str]:
    """Collapse a ranked parent-id sequence into a ranked unique-document list.

    first: documents ordered by the position of their best-ranked unit.
    count: documents ordered by how many units they placed, ties by best rank.
    """
    if mode not in RANK_MODES:
        raise ValueError(f"unknown rank mode: {mode!r}")
    first_seen: dict[str, int] = {}
    counts: Counter[str] = Counter()
    for position, parent in enumerate(parents):
        first_seen.setdefault(parent, position)
        counts[parent] += 1
    if mode == RANK_FIRST:
        return sorted(first_seen, key=lambda doc: first_seen[doc])
    return sorted(first_seen, key=lambda doc: (-counts[doc], first_seen[doc]))


def documents_from_hits(hits: Iterable[SearchHit], mode: str = RANK_FIRST) -> list[str]:
    return rank_documents([hit.parent_id for hit in hits], mode)


def precision_recall_f1(
    retrieved: Sequence[str], relevant: AbstractSet[str]
) -> tuple[float, float, float]:
    """Precision, recall, F1 of a retrieved list against a relevant set.

    Empty retrieved list gives precision 0; empty relevant set gives recall 0.
    """
    if not retrieved or not relevant:
        return 0.0, 0.0, 0.0
    true_positives = sum(1 for doc in retrieved if doc in relevant)
    precision = true_positives / len(retrieved)
    recall = true_positives / len(relevant)
    if precision + recall == 0:
        return precision, recall, 0.0
    f1 = 2 * precision * recall / (precision + recall)
    return precision, recall, f1


@dataclass(frozen=True)
class CurvePoint:
    backend: str
    rank_mode: str
    query_policy: str
    k: int
    recall: float
    precision: float
    f1: float


def default_k_grid() -> list[int]:
    return list(range(10, 301, 10))


def evaluate_qbd(
    topic_queries: Mapping[str, Sequence[str]],
    topic_relevant: Mapping[str, AbstractSet[str]],
    searcher: Callable[[str], Sequence[SearchHit]],
    rank_mode: str = RANK_FIRST,
    k_grid: Sequence[int] | None = None,
    backend: str = "",
    query_policy: str = "document",
) -> list[CurvePoint]:
    """Macro-averaged precision/recall/F1 curves for query-by-document search.

    Each topic document serves once as the query; the query itself never
    counts as retrieved or relevant. Metrics are averaged per topic first,
    then across topics, so topic sizes do not skew the curve.
    """
    if rank_mode not in RANK_MODES:
        raise ValueError(f"unknown rank mode: {rank_mode!r}")
    ks = sorted(set(k_grid if k_grid is not None else default_k_grid()))
    if not ks or ks[0] < 1:
        raise ValueError("k grid must contain positive cut-offs")
    topic_means: dict[int, list[tuple[float, float, float]]] = {k: [] for k in ks}
    for topic in sorted(topic_queries):
        queries = topic_queries[topic]
        relevant = set(topic_relevant[topic])
        per_query: dict[int, list[tuple[float, float, float]]] = {k: [] for k in ks}
        for query_doc in queries:
            hits = searcher(query_doc)
            docs = [d for d in rank_documents([h.parent_id for h in hits], rank_mode) if d != query_doc]
            target = relevant - {query_doc}
            for k in ks:
                per_query[k].append(precision_recall_f1(docs[:k], target))
        if not queries:
            log.warning("topic %s has no queries; skipped", topic)
            continue
        for k in ks:
            rows = per_query[k]
            topic_means[k].append(
                tuple(sum(row[i] for row in rows) / len(rows) for i in range(3))
            )
    points = []
    for k in ks:
        rows = topic_means[k]
        if not rows:
            raise ValueError("no topics with queries to evaluate")
        precision, recall, f1 = (sum(row[i] for row in rows) / len(rows) for i in range(3))
        points.append(
            CurvePoint(
                backend=backend,
                rank_mode=rank_mode,
                query_policy=query_policy,
                k=k,
                recall=recall,
                precision=precision,
                f1=f1,
            )
        )
    return points


def write_curve_csv(path: str | Path, points: Iterable[CurvePoint]) -> None:
    with open(path, "w", newline="") as out:
        writer = csv.writer(out)
        writer.writerow(CURVE_FIELDS)
        for point in points:
            writer.writerow(
                [
                    point.backend,
                    point.rank_mode,
                    point.query_policy,
                    point.k,
                    f"{point.recall:.6f}",
                    f"{point.precision:.6f}",
                    f"{point.f1:.6f}",
                ]
            )


def read_curve_csv(path: str | Path) -> list[CurvePoint]:
    points = []
    with open(path, newline="") as handle:
        for row in csv.DictReader(handle):
            points.append(
                CurvePoint(
                    backend=row["backend"],
                    rank_mode=row["rank_mode"],
                    query_policy=row["query_policy"],
                    k=int(row["k"]),
                    recall=float(row["recall"]),
                    precision=float(row["precision"]),
                    f1=float(row["f1"]),
                )
            )
    return points
