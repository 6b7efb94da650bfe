from __future__ import annotations

import math

import numpy as np
import pytest

from conftest import random_unit_vectors
from recallkit.dense import EmbeddingStore
from recallkit.corpus import parent_of
from recallkit.errors import UnknownIdError, WorkbenchError
from recallkit.feedback import StrategyConfig
from recallkit.simulator import (
    BACKEND_EXACT,
    EXPERIMENT_FIELDS,
    TERMINATED_EXHAUSTED,
    TERMINATED_TARGET,
    BatchItem,
    RetrievalEngine,
    SessionConfig,
    reduction,
    run_experiment,
    run_session,
    write_experiment_csv,
)
from recallkit.synth import SynthConfig, synth_corpus, synth_embeddings, synth_split


@pytest.fixture(scope="module")
def small_world():
    """3 topics x 30 docs, one paragraph each, clustered enough to search."""
    config = SynthConfig(topics=3, docs_per_topic=30, seed=5)
    corpus = synth_corpus(config)
    store = synth_embeddings(corpus, dim=32, seed=5)
    split = synth_split(corpus, seed=5)
    engine = RetrievalEngine(store)
    return corpus, store, split, engine


def topic_of(doc_id: str) -> str:
    return doc_id.rsplit("-", 1)[0]


def test_session_config_validation():
    SessionConfig(query_id="x#0", strategy=StrategyConfig())
    with pytest.raises(ValueError):
        SessionConfig(query_id="x#0", strategy=StrategyConfig(), batch_size=0)
    with pytest.raises(ValueError):
        SessionConfig(query_id="x#0", strategy=StrategyConfig(), target_recall=0.0)
    with pytest.raises(ValueError):
        SessionConfig(query_id="x#0", strategy=StrategyConfig(), backend="faiss")


def test_engine_lookups(small_world):
    corpus, store, split, engine = small_world
    doc = corpus.doc_ids()[0]
    paras = engine.paragraph_ids(doc)
    assert paras and all(p.startswith(doc + "#") for p in paras)
    assert np.allclose(
        engine.document_embedding(doc),
        np.mean([engine.embedding(p) for p in paras], axis=0),
    )
    assert engine.paragraph_ids("missing-doc") == []
    with pytest.raises(UnknownIdError):
        engine.document_embedding("missing-doc")


def test_next_batch_excludes_reviewed_and_query(small_world):
    corpus, store, split, engine = small_world
    from recallkit.feedback import init_state

    query = store.ids[0]
    query_doc = parent_of(query)
    state = init_state(engine.embedding(query))
    config = SessionConfig(query_id=query, strategy=StrategyConfig(), batch_size=10)
    batch = engine.next_batch(state, config, extra_excluded={query_doc})
    assert len(batch) == 10
    docs = [item.doc_id for item in batch]
    assert query_doc not in docs
    assert len(set(docs)) == 10


def test_run_session_reaches_target_and_traces_non_decreasing(small_world):
    corpus, store, split, engine = small_world
    query = store.ids[0]
    relevant = set(corpus.topic_docs(topic_of(parent_of(query))))
    config = SessionConfig(query_id=query, strategy=StrategyConfig(kind="sum", cumulative=True))
    result = run_session(config, relevant, engine)
    assert result.terminated_by == TERMINATED_TARGET
    assert list(result.recall_trace) == sorted(result.recall_trace)
    assert result.recall_trace[-1] >= 0.8
    assert result.iterations == len(result.recall_trace)
    assert len(result.seconds_per_iteration) == result.iterations
    # review-effort lower bound: can't beat batch_size accepts per iteration
    lower = math.ceil(0.8 * (len(relevant) - 1) / 10)
    assert result.iterations >= lower


def test_run_session_deterministic(small_world):
    corpus, store, split, engine = small_world
    query = store.ids[3]
    relevant = set(corpus.topic_docs(topic_of(parent_of(query))))
    config = SessionConfig(query_id=query, strategy=StrategyConfig(kind="rocchio"))
    a = run_session(config, relevant, engine, record=True)
    b = run_session(config, relevant, engine, record=True)
    assert a.iterations == b.iterations
    assert a.recall_trace == b.recall_trace
    assert [r.batch for r in a.records] == [r.batch for r in b.records]


def test_run_session_exhausts_when_target_unreachable():
    # 5 tiny docs; relevant set contains an id the engine can never retrieve
    vectors = random_unit_vectors(5, 8, seed=1).astype(np.float32)
    store = EmbeddingStore([f"d{i}#0" for i in range(5)], list(vectors))
    engine = RetrievalEngine(store)
    config = SessionConfig(query_id="d0#0", strategy=StrategyConfig(), target_recall=0.99)
    result = run_session(config, {"d1", "d2", "ghost-doc"}, engine)
    assert result.terminated_by == TERMINATED_EXHAUSTED
    assert result.recall_trace[-1] < 0.99


def test_run_session_rejects_empty_relevant(small_world):
    corpus, store, split, engine = small_world
    query = store.ids[0]
    with pytest.raises(WorkbenchError):
        run_session(
            SessionConfig(query_id=query, strategy=StrategyConfig()),
            {parent_of(query)},
            engine,
        )


class PerfectOracleEngine(RetrievalEngine):
    """Always serves the next batch straight from the relevant set."""

    def __init__(self, store, relevant):
        super().__init__(store)
        self._relevant = sorted(relevant)

    def next_batch(self, state, config, extra_excluded=frozenset()):
        skip = set(state.reviewed_docs) | set(extra_excluded)
        docs = [d for d in self._relevant if d not in skip][: config.batch_size]
        return [BatchItem(doc_id=d, para_id=f"{d}#0", score=1.0) for d in docs]


def test_perfect_oracle_on_300_doc_topic_takes_exactly_24_iterations():
    vectors = random_unit_vectors(300, 8, seed=2).astype(np.float32)
    ids = [f"t-{i:03d}#0" for i in range(300)]
    store = EmbeddingStore(ids, list(vectors))
    relevant = {f"t-{i:03d}" for i in range(300)}
    engine = PerfectOracleEngine(store, relevant)
    config = SessionConfig(query_id="t-000#0", strategy=StrategyConfig())
    result = run_session(config, relevant, engine)
    # |relevant| = 299 after dropping the query doc; ceil(0.8*299/10) = 24
    assert result.iterations == 24
    assert result.terminated_by == TERMINATED_TARGET


def test_reduction_formula():
    assert reduction(33.36, 28.29) == pytest.approx(17.9215, abs=1e-3)
    assert reduction(46.77, 29.41) == pytest.approx(59.0275, abs=1e-3)
    assert reduction(10.0, 10.0) == 0.0
    with pytest.raises(ValueError):
        reduction(10.0, 0.0)


def test_run_experiment_rows_and_determinism(small_world, tmp_path):
    corpus, store, split, engine = small_world
    configs = [StrategyConfig(kind="none"), StrategyConfig(kind="sum", cumulative=True)]
    doc_paragraphs = {d: engine.paragraph_ids(d) for d in split.doc_ids()}
    kwargs = dict(
        batch_size=10,
        target_recall=0.8,
        queries_per_topic=3,
        seed=11,
    )
    rows = run_experiment(engine, split.split_name, split.topics, configs, doc_paragraphs, **kwargs)
    again = run_experiment(engine, split.split_name, split.topics, configs, doc_paragraphs, **kwargs)
    assert len(rows) == 2
    assert [r.strategy for r in rows] == ["none", "sum"]
    for row, other in zip(rows, again):
        assert row.mean_iterations == other.mean_iterations
        assert row.std_iterations == other.std_iterations
        assert row.sessions == 9  # 3 topics x 3 queries
        assert row.failures == 0
    path = tmp_path / "experiment.csv"
    write_experiment_csv(path, rows)
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(EXPERIMENT_FIELDS)
    assert len(lines) == 3


def test_run_experiment_trace_sink(small_world):
    corpus, store, split, engine = small_world
    doc_paragraphs = {d: engine.paragraph_ids(d) for d in split.doc_ids()}
    sink: list[dict] = []
    run_experiment(
        engine,
        split.split_name,
        split.topics,
        [StrategyConfig(kind="none")],
        doc_paragraphs,
        queries_per_topic=2,
        seed=0,
        trace_sink=sink,
    )
    assert len(sink) == 6  # 3 topics x 2 queries
    for entry in sink:
        assert entry["strategy"] == "none"
        assert entry["iterations"] == len(entry["recall_trace"])
        assert entry["recall_trace"] == sorted(entry["recall_trace"])


def test_synth_corpus_shape_and_determinism():
    config = SynthConfig(topics=2, docs_per_topic=10, seed=9)
    a = synth_corpus(config)
    b = synth_corpus(config)
    assert len(a) == 20
    assert a.topics() == ["synthtopic0", "synthtopic1"]
    assert a.doc_ids() == b.doc_ids()
    for doc_id in a.doc_ids():
        assert a.get(doc_id).sentences == b.get(doc_id).sentences
    # a different seed scrambles the text
    c = synth_corpus(SynthConfig(topics=2, docs_per_topic=10, seed=10))
    assert any(
        a.get(d).sentences != c.get(d).sentences for d in a.doc_ids()
    )
    embeddings = synth_embeddings(a, dim=16, seed=9)
    assert len(embeddings) == sum(1 for _ in a.paragraphs())
    split = synth_split(a, seed=9)
    assert set(split.topics) == {"synthtopic0", "synthtopic1"}
