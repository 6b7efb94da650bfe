from __future__ import annotations

import numpy as np
import pytest

from recallkit.corpus import CorpusStore, Document
from recallkit.dense import EmbeddingStore, hash_embed
from recallkit.tfidf import GRANULARITY_PARAGRAPH, TfidfIndex


def make_doc(doc_id: str, topic: str, sentences: list[str]) -> Document:
    return Document(doc_id=doc_id, topics=frozenset([topic]), sentences=tuple(sentences))


@pytest.fixture
def tiny_corpus() -> CorpusStore:
    """Two topics, four documents, single-paragraph each (3 sentences)."""
    docs = [
        make_doc(
            "apple-1",
            "fruit",
            ["Apples grow on trees.", "The orchard smells sweet.", "Cider season starts soon."],
        ),
        make_doc(
            "apple-2",
            "fruit",
            ["Green apples taste tart.", "Baked apples need cinnamon.", "Pie crust must rest."],
        ),
        make_doc(
            "volt-1",
            "power",
            ["Voltage drives current.", "Resistance limits current.", "Ohm stated the law."],
        ),
        make_doc(
            "volt-2",
            "power",
            ["Transformers step voltage.", "Grids carry current far.", "Losses heat the wires."],
        ),
    ]
    return CorpusStore(docs)


@pytest.fixture
def tiny_index(tiny_corpus) -> TfidfIndex:
    return TfidfIndex.from_corpus(tiny_corpus, GRANULARITY_PARAGRAPH)


@pytest.fixture
def tiny_embeddings(tiny_corpus) -> EmbeddingStore:
    items = [
        (para.para_id, hash_embed(para.embedding_text(), dim=16, seed=7))
        for para in tiny_corpus.paragraphs()
    ]
    return EmbeddingStore.from_items(items)


def random_unit_vectors(count: int, dim: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    vectors = rng.standard_normal((count, dim))
    return vectors / np.linalg.norm(vectors, axis=1, keepdims=True)
