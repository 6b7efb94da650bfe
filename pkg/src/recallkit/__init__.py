"""Recall-oriented document retrieval workbench.

Query-by-document search over sparse and dense indexes, iterative
relevance-feedback re-ranking that never removes documents from the pool,
a labeled-session simulator, and an HTTP review service.
"""
from .corpus import (
    CorpusStore,
    Document,
    Paragraph,
    SplitAssignment,
    ingest_corpus,
    load_splits,
    parent_of,
    sample_splits,
    save_splits,
)
from .dense import (
    EmbeddingStore,
    cosine,
    hash_embed,
    hash_embedder,
    load_embeddings,
    save_embeddings,
)
from .errors import (
    DimensionError,
    FeedbackError,
    IngestError,
    UnknownIdError,
    WorkbenchError,
)
from .feedback import (
    QueryState,
    StrategyConfig,
    apply_feedback,
    init_state,
    keyword_prefilter,
)
from .hnsw import HnswIndex, build_hnsw
from .ranking import (
    RANK_COUNT,
    RANK_FIRST,
    CurvePoint,
    SearchHit,
    evaluate_qbd,
    precision_recall_f1,
    rank_documents,
)
from .simulator import (
    RetrievalEngine,
    SessionConfig,
    SimulationResult,
    reduction,
    run_experiment,
    run_session,
)
from .tfidf import CorpusStats, MltParams, TfidfIndex, idf, jaccard, tfidf_vector

__version__ = "0.1.0"

__all__ = [
    "CorpusStats",
    "CorpusStore",
    "CurvePoint",
    "DimensionError",
    "Document",
    "EmbeddingStore",
    "FeedbackError",
    "HnswIndex",
    "IngestError",
    "MltParams",
    "Paragraph",
    "QueryState",
    "RANK_COUNT",
    "RANK_FIRST",
    "RetrievalEngine",
    "SearchHit",
    "SessionConfig",
    "SimulationResult",
    "SplitAssignment",
    "StrategyConfig",
    "TfidfIndex",
    "UnknownIdError",
    "WorkbenchError",
    "apply_feedback",
    "build_hnsw",
    "cosine",
    "evaluate_qbd",
    "hash_embed",
    "hash_embedder",
    "idf",
    "ingest_corpus",
    "init_state",
    "jaccard",
    "keyword_prefilter",
    "load_embeddings",
    "load_splits",
    "parent_of",
    "precision_recall_f1",
    "rank_documents",
    "reduction",
    "run_experiment",
    "run_session",
    "sample_splits",
    "save_embeddings",
    "save_splits",
    "tfidf_vector",
]
