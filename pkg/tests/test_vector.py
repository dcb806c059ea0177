"""Graph-index behaviour against an exhaustive-scan oracle."""

import numpy as np
import pytest

from casework.errors import DuplicateSegment, InvalidVector, PersistenceError
from casework.vector import HnswIndex, HnswParams

from conftest import random_unit_vectors


def build_index(count: int, seed: int, params: HnswParams | None = None) -> HnswIndex:
    index = HnswIndex(params or HnswParams())
    for i, vec in enumerate(random_unit_vectors(count, seed)):
        index.insert_vector((f"m{i:03d}", 0), vec)
    return index


def overlap(a, b) -> float:
    sa = {key for key, _ in a}
    sb = {key for key, _ in b}
    return len(sa & sb) / max(len(sa), len(sb), 1)


class TestInsertValidation:
    def test_duplicate_key_rejected(self):
        index = HnswIndex()
        vec = random_unit_vectors(1, 0)[0]
        index.insert_vector(("m1", 0), vec)
        with pytest.raises(DuplicateSegment):
            index.insert_vector(("m1", 0), vec)

    def test_non_unit_vector_rejected(self):
        index = HnswIndex()
        with pytest.raises(InvalidVector):
            index.insert_vector(("m1", 0), np.ones(384, dtype=np.float32))

    def test_wrong_dimension_rejected(self):
        index = HnswIndex()
        with pytest.raises(InvalidVector):
            index.insert_vector(("m1", 0), np.array([1.0], dtype=np.float32))

    def test_nan_rejected(self):
        index = HnswIndex()
        vec = random_unit_vectors(1, 0)[0].copy()
        vec[0] = np.nan
        with pytest.raises(InvalidVector):
            index.insert_vector(("m1", 0), vec)

    def test_membership_and_keys(self):
        index = build_index(5, seed=3)
        assert len(index) == 5
        assert ("m000", 0) in index
        assert ("m999", 0) not in index
        assert index.keys == sorted(index.keys)


class TestParams:
    def test_defaults(self):
        params = HnswParams()
        assert params.m == 16
        assert params.ef_construction == 200
        assert params.ef_search == 100
        assert params.m_base == 32

    def test_validation(self):
        with pytest.raises(ValueError):
            HnswParams(m=1)
        with pytest.raises(ValueError):
            HnswParams(m=16, ef_construction=4)


class TestGraphShape:
    def test_invariants_hold_after_bulk_inserts(self):
        index = build_index(300, seed=11)
        assert index.check_graph_invariants() == []

    def test_layer0_connectivity(self):
        index = build_index(300, seed=11)
        assert index.reachable_from_entry() == 300

    def test_build_is_deterministic(self):
        a = build_index(120, seed=7)
        b = build_index(120, seed=7)
        query = random_unit_vectors(1, 99)[0]
        assert a.knn_search(query, 10) == b.knn_search(query, 10)
        assert a._levels == b._levels


class TestSearch:
    def test_empty_index(self):
        index = HnswIndex()
        assert index.knn_search(random_unit_vectors(1, 0)[0], 5) == []
        assert index.exact_knn(random_unit_vectors(1, 0)[0], 5) == []

    def test_k_nonpositive(self):
        index = build_index(10, seed=1)
        assert index.knn_search(random_unit_vectors(1, 0)[0], 0) == []

    def test_ef_below_k_rejected(self):
        index = build_index(10, seed=1)
        with pytest.raises(ValueError):
            index.knn_search(random_unit_vectors(1, 0)[0], k=8, ef=4)

    def test_k_exceeding_size_returns_everything(self):
        index = build_index(20, seed=2)
        hits = index.knn_search(random_unit_vectors(1, 5)[0], k=50)
        assert len(hits) == 20

    def test_scores_are_cosines_sorted_descending(self):
        index = build_index(50, seed=4)
        query = random_unit_vectors(1, 6)[0]
        hits = index.knn_search(query, 10)
        cosines = [cos for _, cos in hits]
        assert cosines == sorted(cosines, reverse=True)
        for key, cos in hits:
            idx = index.keys.index(key)
            direct = 1.0 - float(np.dot(index._vectors[idx], query))
            assert cos == pytest.approx(1.0 - direct, abs=0)

    def test_high_recall_at_default_ef(self):
        index = build_index(400, seed=8)
        queries = random_unit_vectors(20, 23)
        total = 0.0
        for q in queries:
            total += overlap(index.knn_search(q, 10), index.exact_knn(q, 10))
        assert total / len(queries) >= 0.95

    def test_ef_equal_to_size_reproduces_exact_scan(self):
        index = build_index(200, seed=13)
        for q in random_unit_vectors(10, 31):
            approx = index.knn_search(q, 10, ef=len(index))
            exact = index.exact_knn(q, 10)
            assert approx == exact

    def test_duplicate_vectors_tie_break_by_key(self):
        index = HnswIndex()
        vec = random_unit_vectors(1, 17)[0]
        for doc in ("mB", "mA", "mC"):
            index.insert_vector((doc, 0), vec)
        hits = index.exact_knn(vec, 3)
        assert [key for key, _ in hits] == [("mA", 0), ("mB", 0), ("mC", 0)]
        assert index.knn_search(vec, 3, ef=3) == hits


class TestPersistence:
    def test_round_trip_preserves_results(self, tmp_path):
        index = build_index(150, seed=19)
        index.save(tmp_path / "vectors")
        loaded = HnswIndex.load(tmp_path / "vectors")
        assert len(loaded) == len(index)
        assert loaded.check_graph_invariants() == []
        for q in random_unit_vectors(5, 41):
            assert loaded.knn_search(q, 10) == index.knn_search(q, 10)
            assert loaded.exact_knn(q, 10) == index.exact_knn(q, 10)

    def test_save_is_deterministic(self, tmp_path):
        index = build_index(60, seed=29)
        index.save(tmp_path / "a")
        index.save(tmp_path / "b")
        for name in ("hnsw.json", "vectors.f32"):
            assert (tmp_path / "a" / name).read_bytes() == (
                tmp_path / "b" / name
            ).read_bytes()

    def test_inserts_after_load_match_uninterrupted_build(self, tmp_path):
        vectors = random_unit_vectors(120, seed=37)

        whole = HnswIndex()
        for i, vec in enumerate(vectors):
            whole.insert_vector((f"m{i:03d}", 0), vec)

        partial = HnswIndex()
        for i, vec in enumerate(vectors[:70]):
            partial.insert_vector((f"m{i:03d}", 0), vec)
        partial.save(tmp_path / "checkpoint")
        resumed = HnswIndex.load(tmp_path / "checkpoint")
        for i, vec in enumerate(vectors[70:], start=70):
            resumed.insert_vector((f"m{i:03d}", 0), vec)

        assert resumed._levels == whole._levels
        for q in random_unit_vectors(5, 43):
            assert resumed.knn_search(q, 10) == whole.knn_search(q, 10)

    def test_missing_graph_file(self, tmp_path):
        with pytest.raises(PersistenceError):
            HnswIndex.load(tmp_path / "nowhere")

    def test_truncated_vector_file_detected(self, tmp_path):
        index = build_index(10, seed=3)
        index.save(tmp_path / "v")
        raw = (tmp_path / "v" / "vectors.f32").read_bytes()
        (tmp_path / "v" / "vectors.f32").write_bytes(raw[:-8])
        with pytest.raises(PersistenceError):
            HnswIndex.load(tmp_path / "v")
