"""Sparse term index: IDF statistics, MoreLikeThis search, keyword extraction.

The index stores raw term counts per unit (document or paragraph). A term's
inverse document frequency is ``ln(N / (1 + df))``, so terms present in every
unit score at or below zero and drop out of TF-IDF vectors.
"""
from __future__ import annotations

import logging
import math
import struct
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from .corpus import CorpusStore
from .errors import UnknownIdError, WorkbenchError
from .ranking import SearchHit
from .text import PIPELINE_TFIDF, tokenize

log = logging.getLogger(__name__)

GRANULARITY_DOCUMENT = "document"
GRANULARITY_PARAGRAPH = "paragraph"

_MAGIC = b"TFX1"
_VERSION = 1


@dataclass(frozen=True)
class CorpusStats:
    n_units: int
    df: Mapping[str, int]

    @property
    def vocabulary(self) -> set[str]:
        return set(self.df)


def idf(stats: CorpusStats, term: str) -> float:
    """Inverse document frequency; unseen terms count as df = 0."""
    return math.log(stats.n_units / (1 + stats.df.get(term, 0)))


def tfidf_vector(tokens: Iterable[str], stats: CorpusStats) -> dict[str, float]:
    """Sparse term->weight vector; non-positive weights are omitted."""
    vector = {}
    for term, count in Counter(tokens).items():
        weight = count * idf(stats, term)
        if weight > 0:
            vector[term] = weight
    return vector


def jaccard(a: set[str], b: set[str]) -> float:
    """Shared features over total features; two empty sets give 0."""
    if not a and not b:
        return 0.0
    return len(a & b) / len(a | b)


@dataclass(frozen=True)
class MltParams:
    min_df: float = 0.0
    max_df: float = 0.8
    max_query_terms: int = 25

    def __post_init__(self) -> None:
        if not 0.0 <= self.min_df <= 1.0 or not 0.0 <= self.max_df <= 1.0:
            raise ValueError("min_df and max_df must lie in [0, 1]")
        if self.min_df > self.max_df:
            raise ValueError("min_df must not exceed max_df")
        if self.max_query_terms < 1:
            raise ValueError("max_query_terms must be positive")


class TfidfIndex:
    """Inverted index over token units with query-by-document search."""

    def __init__(self, granularity: str = GRANULARITY_DOCUMENT):
        if granularity not in (GRANULARITY_DOCUMENT, GRANULARITY_PARAGRAPH):
            raise ValueError(f"unknown granularity: {granularity!r}")
        self.granularity = granularity
        self._unit_ids: list[str] = []
        self._parents: list[str] = []
        self._unit_index: dict[str, int] = {}
        self._term_counts: list[dict[str, int]] = []
        self._postings: dict[str, list[tuple[int, int]]] = {}
        self._parent_units: dict[str, list[int]] = {}

    @classmethod
    def from_corpus(
        cls,
        store: CorpusStore,
        granularity: str = GRANULARITY_DOCUMENT,
        stopwords: frozenset[str] | None = None,
        group_size: int = 3,
    ) -> "TfidfIndex":
        index = cls(granularity)
        if granularity == GRANULARITY_DOCUMENT:
            for doc in store.documents():
                tokens = tokenize(" ".join(doc.sentences), PIPELINE_TFIDF, stopwords)
                index.add_unit(doc.doc_id, doc.doc_id, tokens)
        else:
            for para in store.paragraphs(group_size):
                tokens = tokenize(para.text, PIPELINE_TFIDF, stopwords)
                index.add_unit(para.para_id, para.parent_id, tokens)
        return index

    def add_unit(self, unit_id: str, parent_id: str, tokens: Iterable[str]) -> None:
        if unit_id in self._unit_index:
            raise WorkbenchError(f"unit {unit_id!r} already indexed")
        idx = len(self._unit_ids)
        counts = dict(Counter(tokens))
        self._unit_ids.append(unit_id)
        self._parents.append(parent_id)
        self._unit_index[unit_id] = idx
        self._term_counts.append(counts)
        self._parent_units.setdefault(parent_id, []).append(idx)
        for term, count in counts.items():
            self._postings.setdefault(term, []).append((idx, count))

    def __len__(self) -> int:
        return len(self._unit_ids)

    def __contains__(self, unit_id: str) -> bool:
        return unit_id in self._unit_index

    def unit_ids(self) -> list[str]:
        return list(self._unit_ids)

    def parent(self, unit_id: str) -> str:
        return self._parents[self._require(unit_id)]

    def unit_tokens(self, unit_id: str) -> dict[str, int]:
        return dict(self._term_counts[self._require(unit_id)])

    def document_tokens(self, doc_id: str) -> set[str]:
        """Distinct tokens of a document, across all of its indexed units."""
        units = self._parent_units.get(doc_id)
        if not units:
            raise UnknownIdError(f"document {doc_id!r} not in index")
        tokens: set[str] = set()
        for idx in units:
            tokens.update(self._term_counts[idx])
        return tokens

    def document_units(self, doc_id: str) -> list[str]:
        """Unit ids belonging to a document, in insertion order."""
        units = self._parent_units.get(doc_id)
        if not units:
            raise UnknownIdError(f"document {doc_id!r} not in index")
        return [self._unit_ids[idx] for idx in units]

    @property
    def stats(self) -> CorpusStats:
        return CorpusStats(
            n_units=len(self._unit_ids),
            df={term: len(postings) for term, postings in self._postings.items()},
        )

    def idf(self, term: str) -> float:
        return math.log(len(self._unit_ids) / (1 + len(self._postings.get(term, ()))))

    def unit_vector(self, unit_id: str) -> dict[str, float]:
        counts = self._term_counts[self._require(unit_id)]
        vector = {}
        for term, count in counts.items():
            weight = count * self.idf(term)
            if weight > 0:
                vector[term] = weight
        return vector

    def _require(self, unit_id: str) -> int:
        try:
            return self._unit_index[unit_id]
        except KeyError:
            raise UnknownIdError(f"unit {unit_id!r} not in index") from None

    def select_query_terms(self, unit_id: str, params: MltParams) -> list[tuple[str, float]]:
        """Query terms for MLT: df-fraction filtered, then top terms by weight."""
        n = len(self._unit_ids)
        eligible = []
        for term, weight in self.unit_vector(unit_id).items():
            fraction = len(self._postings[term]) / n
            if params.min_df <= fraction <= params.max_df:
                eligible.append((term, weight))
        eligible.sort(key=lambda item: (-item[1], item[0]))
        return eligible[: params.max_query_terms]

    def mlt_search(
        self,
        query_unit_id: str,
        params: MltParams | None = None,
        excluded: frozenset[str] | set[str] = frozenset(),
        k: int = 10,
    ) -> list[SearchHit]:
        """Rank units sharing the query's strongest terms by matched-term weight.

        Score of a candidate is the dot product of query and candidate TF-IDF
        weights over the selected query terms. Ties break by ascending unit id.
        """
        if k < 1:
            raise ValueError("k must be >= 1")
        self._require(query_unit_id)
        params = params or MltParams()
        selected = self.select_query_terms(query_unit_id, params)
        if not selected:
            log.warning("no selectable query terms for unit %s under %s", query_unit_id, params)
            return []
        scores: dict[int, float] = {}
        for term, query_weight in selected:
            term_idf = self.idf(term)
            for unit, count in self._postings[term]:
                if self._parents[unit] in excluded:
                    continue
                scores[unit] = scores.get(unit, 0.0) + query_weight * (count * term_idf)
        ranked = sorted(scores.items(), key=lambda item: (-item[1], self._unit_ids[item[0]]))
        return [
            SearchHit(unit_id=self._unit_ids[unit], score=score, rank=rank)
            for rank, (unit, score) in enumerate(ranked[:k], start=1)
        ]

    def top_idf_keywords(self, doc_id: str, count: int) -> list[str]:
        """A document's distinct tokens, most-unique first (idf desc, term asc)."""
        if count < 1:
            raise ValueError("count must be >= 1")
        tokens = self.document_tokens(doc_id)
        ranked = sorted(tokens, key=lambda term: (-self.idf(term), term))
        return ranked[:count]

    # -- persistence ------------------------------------------------------

    def save(self, path: str | Path) -> None:
        terms = sorted(self._postings)
        with open(path, "wb") as out:
            out.write(_MAGIC)
            out.write(struct.pack("<B", _VERSION))
            out.write(struct.pack("<B", 1 if self.granularity == GRANULARITY_PARAGRAPH else 0))
            out.write(struct.pack("<I", len(self._unit_ids)))
            for unit_id, parent in zip(self._unit_ids, self._parents):
                _write_str(out, unit_id)
                _write_str(out, parent)
            out.write(struct.pack("<I", len(terms)))
            for term in terms:
                _write_str(out, term)
                out.write(struct.pack("<I", len(self._postings[term])))
            for term in terms:
                for unit, count in self._postings[term]:
                    out.write(struct.pack("<II", unit, count))

    @classmethod
    def load(cls, path: str | Path) -> "TfidfIndex":
        with open(path, "rb") as handle:
            data = handle.read()
        if data[:4] != _MAGIC:
            raise WorkbenchError(f"{path}: not a TFX1 index file")
        offset = 4
        version, granularity_flag = struct.unpack_from("<BB", data, offset)
        offset += 2
        if version != _VERSION:
            raise WorkbenchError(f"{path}: unsupported index version {version}")
        index = cls(GRANULARITY_PARAGRAPH if granularity_flag else GRANULARITY_DOCUMENT)
        (n_units,) = struct.unpack_from("<I", data, offset)
        offset += 4
        for idx in range(n_units):
            unit_id, offset = _read_str(data, offset)
            parent, offset = _read_str(data, offset)
            index._unit_ids.append(unit_id)
            index._parents.append(parent)
            index._unit_index[unit_id] = idx
            index._term_counts.append({})
            index._parent_units.setdefault(parent, []).append(idx)
        (n_terms,) = struct.unpack_from("<I", data, offset)
        offset += 4
        term_dfs: list[tuple[str, int]] = []
        for _ in range(n_terms):
            term, offset = _read_str(data, offset)
            (df,) = struct.unpack_from("<I", data, offset)
            offset += 4
            term_dfs.append((term, df))
        for term, df in term_dfs:
            postings = []
            for _ in range(df):
                unit, count = struct.unpack_from("<II", data, offset)
                offset += 8
                postings.append((unit, count))
                index._term_counts[unit][term] = count
            index._postings[term] = postings
        return index


def _write_str(out, value: str) -> None:
    raw = value.encode("utf-8")
    if len(raw) > 0xFFFF:
        raise WorkbenchError(f"string too long to serialize: {value[:40]!r}...")
    out.write(struct.pack("<H", len(raw)))
    out.write(raw)


def _read_str(data: bytes, offset: int) -> tuple[str, int]:
    (length,) = struct.unpack_from("<H", data, offset)
    offset += 2
    value = data[offset : offset + length].decode("utf-8")
    return value, offset + length
