"""Relevance-feedback strategies over a per-session query state.

Strategies re-rank by moving the query vector; no strategy ever excludes a
document from future retrieval. All state transitions are pure: the caller
gets a new QueryState and the old one stays valid.

``cumulative`` means the original query vector takes part in the running
sum or average; non-cumulative variants build the query from accepted
paragraphs alone.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, fields as dataclass_fields, replace
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .corpus import parent_of
from .errors import DimensionError, FeedbackError

KIND_NONE = "none"
KIND_KEYWORD = "keyword-expansion"
KIND_ROCCHIO = "rocchio"
KIND_AVERAGE = "average"
KIND_SUM = "sum"
STRATEGY_KINDS = (KIND_NONE, KIND_KEYWORD, KIND_ROCCHIO, KIND_AVERAGE, KIND_SUM)

AVERAGE_SEQUENTIAL = "sequential"
AVERAGE_GLOBAL = "global"
AVERAGE_MODES = (AVERAGE_SEQUENTIAL, AVERAGE_GLOBAL)

SiblingLookup = Callable[[str], Sequence[np.ndarray]]
KeywordLookup = Callable[[str, int], Iterable[str]]


@dataclass(frozen=True)
class StrategyConfig:
    kind: str = KIND_NONE
    cumulative: bool = False
    amplify: bool = False
    alpha: float = 0.5
    beta: float = 0.5
    keywords_per_doc: int = 3
    average_mode: str = AVERAGE_SEQUENTIAL

    def __post_init__(self) -> None:
        if self.kind not in STRATEGY_KINDS:
            raise FeedbackError(f"unknown strategy kind: {self.kind!r}")
        if self.average_mode not in AVERAGE_MODES:
            raise FeedbackError(f"unknown average mode: {self.average_mode!r}")
        if self.alpha < 0 or self.beta < 0:
            raise FeedbackError("alpha and beta must be non-negative")
        if self.keywords_per_doc < 1:
            raise FeedbackError("keywords_per_doc must be >= 1")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "cumulative": self.cumulative,
            "amplify": self.amplify,
            "alpha": self.alpha,
            "beta": self.beta,
            "keywords_per_doc": self.keywords_per_doc,
            "average_mode": self.average_mode,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data: Mapping) -> "StrategyConfig":
        known = {f.name for f in dataclass_fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise FeedbackError(f"unknown strategy fields: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, text: str) -> "StrategyConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise FeedbackError(f"malformed strategy JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise FeedbackError("strategy JSON must be an object")
        return cls.from_dict(data)


@dataclass(frozen=True)
class Signal:
    """One positive embedding; amplified signals came from sibling paragraphs."""

    embedding: np.ndarray
    amplified: bool


@dataclass(frozen=True, eq=False)
class QueryState:
    q0: np.ndarray
    q_cur: np.ndarray
    signals: tuple[Signal, ...] = ()
    accepted_docs: frozenset[str] = frozenset()
    declined_docs: frozenset[str] = frozenset()
    keywords: frozenset[str] = frozenset()

    @property
    def positives(self) -> tuple[np.ndarray, ...]:
        """Accepted paragraph embeddings, in acceptance order."""
        return tuple(s.embedding for s in self.signals if not s.amplified)

    @property
    def amplified(self) -> tuple[np.ndarray, ...]:
        return tuple(s.embedding for s in self.signals if s.amplified)

    @property
    def effective_positives(self) -> tuple[np.ndarray, ...]:
        """All positive signals (accepted plus amplified siblings), in order."""
        return tuple(s.embedding for s in self.signals)

    @property
    def positive_count(self) -> int:
        return sum(1 for s in self.signals if not s.amplified)

    @property
    def reviewed_docs(self) -> frozenset[str]:
        return self.accepted_docs | self.declined_docs


def _as_vector(value: np.ndarray, dim: int | None = None, what: str = "vector") -> np.ndarray:
    vector = np.asarray(value, dtype=np.float64).ravel()
    if dim is not None and vector.shape[0] != dim:
        raise DimensionError(f"{what} has dimension {vector.shape[0]}, expected {dim}")
    vector = vector.copy()
    vector.flags.writeable = False
    return vector


def init_state(query_embedding: np.ndarray) -> QueryState:
    vector = _as_vector(query_embedding, what="query embedding")
    if vector.shape[0] == 0 or not np.any(vector):
        raise DimensionError("query embedding must be a non-zero vector")
    return QueryState(q0=vector, q_cur=vector)


def apply_feedback(
    state: QueryState,
    accepted: Sequence[tuple[str, np.ndarray]],
    declined: Sequence[str],
    config: StrategyConfig,
    siblings: SiblingLookup | None = None,
    keywords_lookup: KeywordLookup | None = None,
) -> QueryState:
    """Fold one review batch into the query state.

    ``accepted`` pairs a paragraph id with its embedding, in review order;
    ``declined`` lists declined document ids. With ``amplify``, each accepted
    paragraph also contributes its sibling embeddings (via ``siblings``),
    placed directly after it. Documents can be reviewed at most once.
    """
    dim = state.q0.shape[0]
    accepted_parents = [parent_of(para_id) for para_id, _ in accepted]
    declined_parents = list(declined)
    touched = accepted_parents + declined_parents
    if len(set(touched)) != len(touched):
        raise FeedbackError("a document appears twice in one feedback batch")
    already = set(touched) & state.reviewed_docs
    if already:
        raise FeedbackError(f"documents already reviewed: {sorted(already)[:5]}")

    amplify = config.amplify and config.kind in (KIND_ROCCHIO, KIND_AVERAGE, KIND_SUM)
    if amplify and siblings is None:
        raise FeedbackError("amplified feedback requires a sibling lookup")
    new_signals: list[Signal] = []
    for para_id, embedding in accepted:
        new_signals.append(Signal(_as_vector(embedding, dim, f"embedding of {para_id!r}"), False))
        if amplify:
            for sibling in siblings(para_id):
                new_signals.append(
                    Signal(_as_vector(sibling, dim, f"sibling of {para_id!r}"), True)
                )

    keywords = state.keywords
    if config.kind == KIND_KEYWORD and accepted_parents:
        if keywords_lookup is None:
            raise FeedbackError("keyword expansion requires a keyword lookup")
        gathered = set(keywords)
        for doc_id in accepted_parents:
            gathered.update(keywords_lookup(doc_id, config.keywords_per_doc))
        keywords = frozenset(gathered)

    signals = state.signals + tuple(new_signals)
    effective = [s.embedding for s in signals]
    q_cur = _next_query(state, config, effective, [s.embedding for s in new_signals])
    return replace(
        state,
        q_cur=q_cur,
        signals=signals,
        accepted_docs=state.accepted_docs | set(accepted_parents),
        declined_docs=state.declined_docs | set(declined_parents),
        keywords=keywords,
    )


def _next_query(
    state: QueryState,
    config: StrategyConfig,
    effective: list[np.ndarray],
    new: list[np.ndarray],
) -> np.ndarray:
    if config.kind == KIND_NONE:
        return state.q_cur
    if config.kind == KIND_KEYWORD:
        return state.q0
    if config.kind == KIND_ROCCHIO:
        if not effective:
            return state.q0
        mean = np.mean(np.stack(effective), axis=0)
        return _freeze(config.alpha * state.q0 + config.beta * mean)
    if config.kind == KIND_SUM:
        if config.cumulative:
            return _freeze(state.q0 + _total(effective, state.q0.shape[0]))
        if not effective:
            return state.q0
        return _freeze(_total(effective, state.q0.shape[0]))
    # average
    if config.cumulative:
        if config.average_mode == AVERAGE_SEQUENTIAL:
            q_cur = state.q_cur
            for positive in new:
                q_cur = (q_cur + positive) / 2.0
            return _freeze(np.array(q_cur))
        return _freeze(np.mean(np.stack([state.q0] + effective), axis=0))
    if not effective:
        return state.q0
    return _freeze(np.mean(np.stack(effective), axis=0))


def _total(vectors: list[np.ndarray], dim: int) -> np.ndarray:
    if not vectors:
        return np.zeros(dim)
    return np.sum(np.stack(vectors), axis=0)


def _freeze(vector: np.ndarray) -> np.ndarray:
    vector = np.asarray(vector, dtype=np.float64)
    vector.flags.writeable = False
    return vector


def keyword_prefilter(keywords: frozenset[str] | set[str], candidate_tokens: Iterable[str]) -> bool:
    """True when the candidate holds at least one collected keyword.

    An empty keyword set imposes no restriction yet, so everything passes.
    """
    if not keywords:
        return True
    if isinstance(candidate_tokens, (set, frozenset, dict)):
        return not keywords.isdisjoint(candidate_tokens)
    return any(token in keywords for token in candidate_tokens)
