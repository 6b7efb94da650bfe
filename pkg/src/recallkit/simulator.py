"""Iterative review sessions: batched retrieval, feedback, recall accounting.

A session repeatedly retrieves paragraphs, collapses them to a ranked batch
of unreviewed documents, labels the batch, folds accepted paragraphs back
into the query, and stops once the accepted documents cover the target
share of the relevant set. The per-iteration engine here is the same one
the HTTP service drives, so a recorded interactive session replays exactly.
"""
from __future__ import annotations

import csv
import logging
import math
import time
from dataclasses import dataclass
from typing import AbstractSet, Callable, Iterable, Mapping, Sequence

import numpy as np

from .corpus import parent_of
from .dense import EmbeddingStore
from .errors import FeedbackError, UnknownIdError, WorkbenchError
from .feedback import (
    QueryState,
    StrategyConfig,
    apply_feedback,
    init_state,
    keyword_prefilter,
)
from .hnsw import HnswIndex
from .ranking import RANK_FIRST, RANK_MODES, SearchHit, rank_documents
from .tfidf import TfidfIndex

log = logging.getLogger(__name__)

BACKEND_EXACT = "exact"
BACKEND_HNSW = "hnsw"
SESSION_BACKENDS = (BACKEND_EXACT, BACKEND_HNSW)

TERMINATED_TARGET = "target"
TERMINATED_CAP = "cap"
TERMINATED_EXHAUSTED = "exhausted"

EXPERIMENT_FIELDS = (
    "strategy",
    "cumulative",
    "amplify",
    "split",
    "mean_iterations",
    "std_iterations",
    "mean_seconds_per_iteration",
    "sessions",
    "failures",
)


@dataclass(frozen=True)
class SessionConfig:
    query_id: str
    strategy: StrategyConfig
    batch_size: int = 10
    target_recall: float = 0.8
    max_iterations: int = 1000
    backend: str = BACKEND_EXACT
    rank_mode: str = RANK_FIRST
    ef_search: int = 100

    def __post_init__(self) -> None:
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if not 0 < self.target_recall <= 1:
            raise ValueError("target_recall must lie in (0, 1]")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.backend not in SESSION_BACKENDS:
            raise ValueError(f"unknown session backend: {self.backend!r}")
        if self.rank_mode not in RANK_MODES:
            raise ValueError(f"unknown rank mode: {self.rank_mode!r}")


def _ordinal_key(unit_id: str) -> tuple[int, str]:
    # paragraph ids end in "#<ordinal>"; plain document ids sort after them
    head, sep, tail = unit_id.rpartition("#")
    if sep and tail.isdigit():
        return (int(tail), head)
    return (1 << 31, unit_id)


@dataclass(frozen=True)
class BatchItem:
    doc_id: str
    para_id: str
    score: float


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    batch: tuple[BatchItem, ...]
    accepted: tuple[str, ...]
    declined: tuple[str, ...]
    recall: float | None
    seconds: float


@dataclass(frozen=True)
class SimulationResult:
    iterations: int
    recall_trace: tuple[float, ...]
    accepted_count: int
    declined_count: int
    seconds_per_iteration: tuple[float, ...]
    terminated_by: str
    records: tuple[IterationRecord, ...] = ()


class RetrievalEngine:
    """Paragraph retrieval plus feedback plumbing over immutable indexes.

    Holds the paragraph embeddings (exact backend), an optional proximity
    graph (approximate backend), and an optional term index that powers
    keyword expansion and its prefilter. Safe for concurrent reads.
    """

    def __init__(
        self,
        embeddings: EmbeddingStore,
        tfidf_index: TfidfIndex | None = None,
        ann: HnswIndex | None = None,
    ):
        self._embeddings = embeddings
        self._tfidf = tfidf_index
        self._ann = ann
        children: dict[str, list[str]] = {}
        for unit_id in embeddings.ids:
            children.setdefault(parent_of(unit_id), []).append(unit_id)
        for unit_ids in children.values():
            unit_ids.sort(key=_ordinal_key)
        self._children = children
        self._doc_tokens_cache: dict[str, frozenset[str]] = {}

    @property
    def embeddings(self) -> EmbeddingStore:
        return self._embeddings

    @property
    def document_count(self) -> int:
        return len(self._children)

    def embedding(self, para_id: str) -> np.ndarray:
        return self._embeddings.vector(para_id).astype(np.float64)

    def paragraph_ids(self, doc_id: str) -> list[str]:
        """A document's paragraph unit ids in ordinal order; empty if unknown."""
        return list(self._children.get(doc_id, ()))

    def document_embedding(self, doc_id: str) -> np.ndarray:
        """Mean of a document's paragraph embeddings."""
        unit_ids = self._children.get(doc_id)
        if not unit_ids:
            raise UnknownIdError(f"document {doc_id!r} not in embedding store")
        stacked = np.stack([self._embeddings.vector(uid) for uid in unit_ids]).astype(np.float64)
        return stacked.mean(axis=0)

    def sibling_embeddings(self, para_id: str) -> list[np.ndarray]:
        """Embeddings of the other paragraphs of para_id's document, in order."""
        parent = parent_of(para_id)
        unit_ids = self._children.get(parent)
        if not unit_ids:
            raise UnknownIdError(f"unit {para_id!r} not in embedding store")
        return [
            self._embeddings.vector(uid).astype(np.float64)
            for uid in unit_ids
            if uid != para_id
        ]

    def keyword_lookup(self, doc_id: str, count: int) -> list[str]:
        if self._tfidf is None:
            raise FeedbackError("keyword expansion requires a term index")
        return self._tfidf.top_idf_keywords(doc_id, count)

    def _document_tokens(self, doc_id: str) -> frozenset[str]:
        cached = self._doc_tokens_cache.get(doc_id)
        if cached is None:
            cached = frozenset(self._tfidf.document_tokens(doc_id))
            self._doc_tokens_cache[doc_id] = cached
        return cached

    def keyword_predicate(self, keywords: frozenset[str]) -> Callable[[str], bool] | None:
        """Unit filter that keeps paragraphs whose parent holds a keyword."""
        if not keywords:
            return None
        if self._tfidf is None:
            raise FeedbackError("keyword prefiltering requires a term index")

        def predicate(unit_id: str) -> bool:
            return keyword_prefilter(keywords, self._document_tokens(parent_of(unit_id)))

        return predicate

    def search(
        self,
        query: np.ndarray,
        k: int,
        backend: str = BACKEND_EXACT,
        ef_search: int = 100,
        excluded: frozenset[str] | set[str] = frozenset(),
        predicate: Callable[[str], bool] | None = None,
    ) -> list[SearchHit]:
        if backend == BACKEND_EXACT:
            return self._embeddings.search(query, k=k, excluded=excluded, predicate=predicate)
        if backend == BACKEND_HNSW:
            if self._ann is None:
                raise WorkbenchError("no proximity-graph index loaded")
            return self._ann.search(
                query, k=k, ef=max(ef_search, k), excluded=excluded, predicate=predicate
            )
        raise ValueError(f"unknown session backend: {backend!r}")

    def next_batch(
        self,
        state: QueryState,
        config: SessionConfig,
        extra_excluded: AbstractSet[str] = frozenset(),
    ) -> list[BatchItem]:
        """Top unreviewed documents for the current query, best paragraph each.

        Fetches paragraphs generously and doubles the fetch size until the
        batch fills or candidates run out; exclusion thins candidates as a
        session ages, so a fixed fetch size would starve late batches.
        """
        excluded = set(state.reviewed_docs) | set(extra_excluded)
        predicate = self.keyword_predicate(state.keywords)
        total = len(self._embeddings)
        k = min(20 * config.batch_size, total)
        while True:
            hits = self.search(
                state.q_cur,
                k=k,
                backend=config.backend,
                ef_search=config.ef_search,
                excluded=excluded,
                predicate=predicate,
            )
            batch = self._collapse(hits, config.rank_mode, config.batch_size)
            if len(batch) >= config.batch_size:
                return batch
            if len(hits) < k or k >= total:
                return batch
            k = min(k * 2, total)

    @staticmethod
    def _collapse(hits: Sequence[SearchHit], rank_mode: str, batch_size: int) -> list[BatchItem]:
        parents = [hit.parent_id for hit in hits]
        ranked_docs = rank_documents(parents, rank_mode)[:batch_size]
        best: dict[str, SearchHit] = {}
        for hit in hits:
            best.setdefault(hit.parent_id, hit)
        return [
            BatchItem(doc_id=doc, para_id=best[doc].unit_id, score=best[doc].score)
            for doc in ranked_docs
        ]


def run_session(
    config: SessionConfig,
    relevant: AbstractSet[str],
    engine: RetrievalEngine,
    record: bool = False,
) -> SimulationResult:
    """Run one labeled review session until target recall, cap, or exhaustion.

    ``relevant`` is the oracle: a batch document is accepted iff it is in the
    set. The query's own document never counts as relevant or retrievable.
    Per-iteration seconds cover retrieval and feedback, not labeling.
    """
    query_doc = parent_of(config.query_id)
    relevant = set(relevant) - {query_doc}
    if not relevant:
        raise WorkbenchError("relevant set is empty aside from the query document")
    if config.query_id not in engine.embeddings:
        raise UnknownIdError(f"unit {config.query_id!r} not in embedding store")

    state = init_state(engine.embedding(config.query_id))
    recall_trace: list[float] = []
    seconds: list[float] = []
    records: list[IterationRecord] = []
    iterations = 0
    terminated_by = TERMINATED_CAP
    while True:
        started = time.perf_counter()
        batch = engine.next_batch(state, config, extra_excluded={query_doc})
        retrieval_seconds = time.perf_counter() - started
        if not batch:
            terminated_by = TERMINATED_EXHAUSTED
            break
        accepted = [
            (item.para_id, engine.embedding(item.para_id))
            for item in batch
            if item.doc_id in relevant
        ]
        declined = [item.doc_id for item in batch if item.doc_id not in relevant]
        started = time.perf_counter()
        state = apply_feedback(
            state,
            accepted,
            declined,
            config.strategy,
            siblings=engine.sibling_embeddings,
            keywords_lookup=engine.keyword_lookup,
        )
        feedback_seconds = time.perf_counter() - started
        iterations += 1
        recall = len(state.accepted_docs & relevant) / len(relevant)
        recall_trace.append(recall)
        seconds.append(retrieval_seconds + feedback_seconds)
        if record:
            records.append(
                IterationRecord(
                    iteration=iterations,
                    batch=tuple(batch),
                    accepted=tuple(item.doc_id for item in batch if item.doc_id in relevant),
                    declined=tuple(declined),
                    recall=recall,
                    seconds=seconds[-1],
                )
            )
        if recall >= config.target_recall:
            terminated_by = TERMINATED_TARGET
            break
        if iterations >= config.max_iterations:
            terminated_by = TERMINATED_CAP
            break
    return SimulationResult(
        iterations=iterations,
        recall_trace=tuple(recall_trace),
        accepted_count=len(state.accepted_docs),
        declined_count=len(state.declined_docs),
        seconds_per_iteration=tuple(seconds),
        terminated_by=terminated_by,
        records=tuple(records),
    )


def reduction(baseline_mean: float, method_mean: float) -> float:
    """Review-effort reduction, in percent, of a method against a baseline."""
    if method_mean <= 0:
        raise ValueError("method mean must be positive")
    return 100.0 * (baseline_mean - method_mean) / method_mean


@dataclass(frozen=True)
class ExperimentRow:
    strategy: str
    cumulative: bool
    amplify: bool
    split: str
    mean_iterations: float
    std_iterations: float
    mean_seconds_per_iteration: float
    sessions: int
    failures: int


def run_experiment(
    engine: RetrievalEngine,
    split_name: str,
    topic_docs: Mapping[str, Sequence[str]],
    configs: Sequence[StrategyConfig],
    doc_paragraphs: Mapping[str, Sequence[str]],
    batch_size: int = 10,
    target_recall: float = 0.8,
    max_iterations: int = 1000,
    backend: str = BACKEND_EXACT,
    rank_mode: str = RANK_FIRST,
    ef_search: int = 100,
    query_policy: str = "first",
    seed: int = 0,
    queries_per_topic: int | None = None,
    trace_sink: list[dict] | None = None,
) -> list[ExperimentRow]:
    """Mean/std iterations-to-target per strategy over one split's topics.

    Every document of every topic serves as a query (capped per topic by
    ``queries_per_topic``, seeded sample). Failed sessions are excluded
    from the means and surface in the failure count. When `trace_sink` is
    given, one record per session (strategy, topic, query, recall trace)
    is appended to it.
    """
    import random as _random

    if query_policy not in ("first", "random"):
        raise ValueError(f"unknown query policy: {query_policy!r}")
    rows = []
    for strategy in configs:
        iteration_counts: list[int] = []
        iteration_seconds: list[float] = []
        failures = 0
        for topic in sorted(topic_docs):
            docs = list(topic_docs[topic])
            relevant = set(docs)
            queries = docs
            if queries_per_topic is not None and queries_per_topic < len(docs):
                sampler = _random.Random(f"{seed}:{split_name}:{topic}")
                queries = sorted(sampler.sample(docs, queries_per_topic))
            for query_doc in queries:
                paragraphs = list(doc_paragraphs[query_doc])
                if not paragraphs:
                    failures += 1
                    log.warning("query %s has no paragraphs; session skipped", query_doc)
                    continue
                if query_policy == "first":
                    query_id = paragraphs[0]
                else:
                    query_id = _random.Random(f"{seed}:{query_doc}").choice(sorted(paragraphs))
                config = SessionConfig(
                    query_id=query_id,
                    strategy=strategy,
                    batch_size=batch_size,
                    target_recall=target_recall,
                    max_iterations=max_iterations,
                    backend=backend,
                    rank_mode=rank_mode,
                    ef_search=ef_search,
                )
                try:
                    result = run_session(config, relevant, engine)
                except WorkbenchError as exc:
                    failures += 1
                    log.warning("session for %s failed: %s", query_doc, exc)
                    continue
                iteration_counts.append(result.iterations)
                iteration_seconds.extend(result.seconds_per_iteration)
                if trace_sink is not None:
                    trace_sink.append(
                        {
                            "strategy": strategy.kind,
                            "cumulative": strategy.cumulative,
                            "amplify": strategy.amplify,
                            "topic": topic,
                            "query_doc": query_doc,
                            "query_id": query_id,
                            "iterations": result.iterations,
                            "terminated_by": result.terminated_by,
                            "recall_trace": list(result.recall_trace),
                        }
                    )
        if iteration_counts:
            mean_iter = float(np.mean(iteration_counts))
            std_iter = float(np.std(iteration_counts))
        else:
            mean_iter = math.nan
            std_iter = math.nan
        mean_secs = float(np.mean(iteration_seconds)) if iteration_seconds else math.nan
        rows.append(
            ExperimentRow(
                strategy=strategy.kind,
                cumulative=strategy.cumulative,
                amplify=strategy.amplify,
                split=split_name,
                mean_iterations=mean_iter,
                std_iterations=std_iter,
                mean_seconds_per_iteration=mean_secs,
                sessions=len(iteration_counts),
                failures=failures,
            )
        )
    return rows


def write_experiment_csv(path, rows: Iterable[ExperimentRow]) -> None:
    with open(path, "w", newline="") as out:
        writer = csv.writer(out)
        writer.writerow(EXPERIMENT_FIELDS)
        for row in rows:
            writer.writerow(
                [
                    row.strategy,
                    str(row.cumulative).lower(),
                    str(row.amplify).lower(),
                    row.split,
                    f"{row.mean_iterations:.4f}",
                    f"{row.std_iterations:.4f}",
                    f"{row.mean_seconds_per_iteration:.6f}",
                    row.sessions,
                    row.failures,
                ]
            )
