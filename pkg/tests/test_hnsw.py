from __future__ import annotations

import numpy as np
import pytest

from conftest import random_unit_vectors
from recallkit.dense import EmbeddingStore
from recallkit.errors import DimensionError, UnknownIdError
from recallkit.hnsw import HnswIndex, build_hnsw


def small_index(count=120, dim=8, seed=0, **kwargs) -> tuple[HnswIndex, EmbeddingStore]:
    vectors = random_unit_vectors(count, dim, seed)
    ids = [f"d{i:03d}#0" for i in range(count)]
    index = build_hnsw(zip(ids, vectors), dim=dim, **kwargs)
    store = EmbeddingStore(ids, vectors.astype(np.float32))
    return index, store


def test_add_and_lookup():
    index = HnswIndex(dim=4, m=4)
    index.add("a#0", [1, 0, 0, 0])
    index.add("b#0", [0, 1, 0, 0])
    assert len(index) == 2
    assert "a#0" in index
    assert np.allclose(index.vector("a#0"), [1, 0, 0, 0])
    with pytest.raises(UnknownIdError):
        index.vector("c#0")
    with pytest.raises(Exception):
        index.add("a#0", [0, 0, 1, 0])  # duplicate id
    with pytest.raises(DimensionError):
        index.add("d#0", [1, 0])


def test_search_empty_index():
    assert HnswIndex(dim=4).search(np.ones(4), k=3) == []


def test_search_validates_query():
    index, _ = small_index(count=10)
    with pytest.raises(DimensionError):
        index.search(np.ones(3), k=1)
    with pytest.raises(DimensionError):
        index.search(np.zeros(8), k=1)
    with pytest.raises(ValueError):
        index.search(np.ones(8), k=0)


def test_high_ef_matches_exact_search():
    # with ef covering the whole index the beam search degenerates to exact
    index, store = small_index(count=100, dim=8, seed=2)
    queries = random_unit_vectors(20, 8, seed=3)
    for q in queries:
        approx = index.search(q, k=10, ef=100)
        exact = store.search(q, k=10)
        assert [h.unit_id for h in approx] == [h.unit_id for h in exact]
        for a, e in zip(approx, exact):
            assert a.score == pytest.approx(e.score, abs=1e-5)


def test_build_deterministic_under_seed():
    a, _ = small_index(count=80, seed=5, level_seed=9)
    b, _ = small_index(count=80, seed=5, level_seed=9)
    query = random_unit_vectors(1, 8, seed=6)[0]
    assert [h.unit_id for h in a.search(query, k=10)] == [
        h.unit_id for h in b.search(query, k=10)
    ]
    assert a._levels == b._levels
    assert a._links == b._links


def test_filter_during_traversal_never_surfaces_excluded():
    index, store = small_index(count=150, dim=8, seed=1)
    query = random_unit_vectors(1, 8, seed=4)[0]
    unfiltered = index.search(query, k=5, ef=60)
    drop = {h.unit_id.rsplit("#", 1)[0] for h in unfiltered[:2]}
    filtered = index.search(query, k=5, ef=60, excluded=drop)
    assert len(filtered) == 5
    assert all(h.unit_id.rsplit("#", 1)[0] not in drop for h in filtered)
    # filtering matches exact search over the surviving candidates
    exact = store.search(query, k=5, excluded=drop)
    assert [h.unit_id for h in filtered] == [h.unit_id for h in exact]


def test_predicate_filter():
    index, _ = small_index(count=60, dim=8, seed=7)
    query = random_unit_vectors(1, 8, seed=8)[0]
    hits = index.search(query, k=5, ef=60, predicate=lambda uid: uid < "d030")
    assert hits and all(h.unit_id < "d030" for h in hits)


def test_save_load_round_trip_identical(tmp_path):
    index, _ = small_index(count=90, dim=8, seed=11, level_seed=3)
    path = tmp_path / "graph.hnsw"
    index.save(path)
    loaded = HnswIndex.load(path)
    assert loaded.ids == index.ids
    assert loaded._levels == index._levels
    assert loaded._links == index._links
    for uid in index.ids[:10]:
        assert np.array_equal(loaded.vector(uid), index.vector(uid))
    query = random_unit_vectors(1, 8, seed=12)[0]
    assert [(h.unit_id, h.score) for h in loaded.search(query, k=10)] == [
        (h.unit_id, h.score) for h in index.search(query, k=10)
    ]


def test_load_then_add_matches_uninterrupted_build(tmp_path):
    # the level RNG must continue exactly where the saved build stopped
    vectors = random_unit_vectors(60, 8, seed=13)
    ids = [f"d{i:03d}#0" for i in range(60)]

    whole = build_hnsw(zip(ids, vectors), dim=8, level_seed=21)

    partial = build_hnsw(zip(ids[:40], vectors[:40]), dim=8, level_seed=21)
    path = tmp_path / "partial.hnsw"
    partial.save(path)
    resumed = HnswIndex.load(path)
    for uid, vec in zip(ids[40:], vectors[40:]):
        resumed.add(uid, vec)

    assert resumed._levels == whole._levels
    assert resumed._links == whole._links


def test_load_rejects_corrupt_file(tmp_path):
    path = tmp_path / "bad.hnsw"
    path.write_bytes(b"XXXX" + b"\x00" * 32)
    with pytest.raises(Exception):
        HnswIndex.load(path)


def test_recall_at_10_small_scale():
    # cheap stand-in for the full-size quality gate; the acceptance suite
    # runs the 10k-vector version
    index, store = small_index(count=2000, dim=16, seed=17, m=16, ef_construction=100)
    queries = random_unit_vectors(50, 16, seed=18)
    hits = 0
    for q in queries:
        approx = {h.unit_id for h in index.search(q, k=10, ef=100)}
        exact = {h.unit_id for h in store.search(q, k=10)}
        hits += len(approx & exact)
    assert hits / (50 * 10) >= 0.95
