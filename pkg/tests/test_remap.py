import numpy as np
import pytest

from xlingeval.corpusio import ScoredPair
from xlingeval.errors import ArgumentError, DegenerateInputError
from xlingeval.evaluation import precision_at_n, retrieval_ranks
from xlingeval.remap import (ProjectionMap, WordPairSet, apply_remap,
                             extract_word_pairs, fit_clp, fit_umd)

from conftest import random_orthogonal, sent, word_store


def pair_set(X, Y):
    m = X.shape[1]
    names = tuple((f"s{i}", f"t{i}") for i in range(m))
    return WordPairSet(pairs=names, source_matrix=X, target_matrix=Y)


class TestFitClp:
    def test_identity_when_equal(self):
        rng = np.random.default_rng(0)
        X = rng.normal(size=(4, 20))
        W = fit_clp(pair_set(X, X)).matrix
        assert W == pytest.approx(np.eye(4), abs=1e-9)

    def test_recovers_planted_rotation(self):
        rng = np.random.default_rng(1)
        d, m = 8, 200
        R = random_orthogonal(rng, d)
        X = rng.normal(size=(d, m))
        W = fit_clp(pair_set(X, R @ X)).matrix
        assert np.linalg.norm(W - R) <= 1e-6

    def test_noisy_recovery(self):
        rng = np.random.default_rng(2)
        d, m = 16, 1000
        R = random_orthogonal(rng, d)
        X = rng.normal(size=(d, m))
        Y = R @ X + 0.01 * rng.normal(size=(d, m))
        W = fit_clp(pair_set(X, Y)).matrix
        assert np.linalg.norm(W - R) <= 0.05

    @pytest.mark.parametrize("seed", range(10))
    def test_always_orthogonal(self, seed):
        rng = np.random.default_rng(100 + seed)
        d = int(rng.integers(2, 10))
        m = int(rng.integers(1, 30))
        W = fit_clp(pair_set(rng.normal(size=(d, m)),
                             rng.normal(size=(d, m)))).matrix
        assert np.abs(W.T @ W - np.eye(d)).max() <= 1e-6

    def test_grid_optimality_2d(self):
        rng = np.random.default_rng(3)
        for _ in range(5):
            m = int(rng.integers(1, 5))
            X = rng.normal(size=(2, m))
            Y = rng.normal(size=(2, m))
            W = fit_clp(pair_set(X, Y)).matrix
            fitted = np.linalg.norm(W @ X - Y)
            best = np.inf
            for theta in np.arange(0, 360, 0.1):
                t = np.deg2rad(theta)
                for det in (1.0, -1.0):
                    R = np.array([[np.cos(t), -det * np.sin(t)],
                                  [np.sin(t), det * np.cos(t)]])
                    best = min(best, np.linalg.norm(R @ X - Y))
            assert fitted <= best + 1e-6

    def test_degenerate_flagged(self):
        X = np.zeros((3, 4))
        X[0] = [1, 2, 3, 4]
        result = fit_clp(pair_set(X, X))
        assert result.degenerate


class TestFitUmd:
    def test_single_direction(self):
        X = np.array([[2.0, 2.0], [0, 0], [0, 0]])
        Y = np.zeros((3, 2))
        v = fit_umd(pair_set(X, Y)).bias_vector
        assert v == pytest.approx(np.array([1.0, 0, 0]))

    def test_dominant_of_two_directions(self):
        # differences along e1 (magnitude 5) and e2 (magnitude 1)
        diffs = np.array([[5.0, 0.0], [-5.0, 0.0], [0.0, 1.0]]).T
        X = diffs
        Y = np.zeros_like(X)
        v = fit_umd(pair_set(X, Y)).bias_vector
        assert v == pytest.approx(np.array([1.0, 0.0]), abs=1e-12)

    def test_identical_pairs_degenerate(self):
        X = np.ones((3, 4))
        with pytest.raises(DegenerateInputError):
            fit_umd(pair_set(X, X))

    def test_sign_deterministic(self):
        rng = np.random.default_rng(4)
        X = rng.normal(size=(5, 30))
        Y = rng.normal(size=(5, 30))
        v1 = fit_umd(pair_set(X, Y)).bias_vector
        v2 = fit_umd(pair_set(-X, -Y)).bias_vector
        assert v1 == pytest.approx(v2)


class TestApplyRemap:
    def test_bias_removal_projection(self):
        pmap = ProjectionMap(kind="bias-removal",
                             bias_vector=np.array([1.0, 0.0]))
        store = word_store({"w": np.array([3.0, 4.0], dtype=np.float32)})
        out = apply_remap(store, pmap)
        assert out.vector("w") == pytest.approx(np.array([0.0, 4.0]))

    def test_bias_removal_orthogonal_vector_unchanged(self):
        pmap = ProjectionMap(kind="bias-removal",
                             bias_vector=np.array([1.0, 0.0]))
        store = word_store({"w": np.array([0.0, 7.0], dtype=np.float32)})
        assert apply_remap(store, pmap).vector("w") == pytest.approx(
            np.array([0.0, 7.0]))

    def test_rotation(self):
        W = np.array([[0.0, -1.0], [1.0, 0.0]])
        pmap = ProjectionMap(kind="orthogonal", matrix=W)
        store = word_store({"w": np.array([1.0, 0.0], dtype=np.float32)})
        assert apply_remap(store, pmap).vector("w") == pytest.approx(
            np.array([0.0, 1.0]))

    def test_dimension_mismatch(self):
        pmap = ProjectionMap(kind="orthogonal", matrix=np.eye(3))
        store = word_store({"w": np.zeros(2, dtype=np.float32)})
        with pytest.raises(ArgumentError):
            apply_remap(store, pmap)

    def test_bias_removal_exactness_bulk(self):
        rng = np.random.default_rng(5)
        v = rng.normal(size=16)
        v /= np.linalg.norm(v)
        pmap = ProjectionMap(kind="bias-removal", bias_vector=v)
        store = word_store({f"w{i}": rng.normal(size=16).astype(np.float32)
                            for i in range(200)})
        out = apply_remap(store, pmap)
        for key in store.entries:
            assert abs(float(out.vector(key) @ v)) <= 1e-6

    def test_preserves_keys_and_order(self):
        rng = np.random.default_rng(6)
        store = word_store({f"w{i}": rng.normal(size=4).astype(np.float32)
                            for i in range(10)})
        pmap = ProjectionMap(kind="orthogonal", matrix=np.eye(4))
        out = apply_remap(store, pmap)
        assert list(out.entries.keys()) == list(store.entries.keys())


class TestProjectionPersistence:
    def test_orthogonal_roundtrip(self):
        rng = np.random.default_rng(7)
        W = random_orthogonal(rng, 6)
        pmap = ProjectionMap(kind="orthogonal", matrix=W)
        back = ProjectionMap.from_store(pmap.to_store())
        assert back.matrix == pytest.approx(W, abs=1e-6)

    def test_bias_roundtrip(self):
        v = np.array([0.6, 0.8])
        pmap = ProjectionMap(kind="bias-removal", bias_vector=v)
        back = ProjectionMap.from_store(pmap.to_store())
        assert back.bias_vector == pytest.approx(v, abs=1e-7)


class TestExtractWordPairs:
    def test_identity_sentences_align_diagonally(self):
        rng = np.random.default_rng(8)
        vecs = {w: rng.normal(size=4).astype(np.float32) for w in "a b c".split()}
        store = word_store(vecs)
        pairs = extract_word_pairs([ScoredPair(sent("a b c"), sent("a b c"), 0.0)],
                                   store, store, min_flow=0.05)
        assert set(pairs.pairs) == {("a", "a"), ("b", "b"), ("c", "c")}

    def test_empty_input(self):
        store = word_store({"a": np.zeros(2, dtype=np.float32)})
        pairs = extract_word_pairs([], store, store, 0.05)
        assert len(pairs) == 0

    def test_dedup_keeps_first(self):
        rng = np.random.default_rng(9)
        vecs = {w: rng.normal(size=4).astype(np.float32) for w in "a b".split()}
        store = word_store(vecs)
        sp = ScoredPair(sent("a b"), sent("a b"), 0.0)
        pairs = extract_word_pairs([sp, sp], store, store, 0.05)
        assert len(pairs) == 2  # (a,a), (b,b) once each

    def test_missing_token_named(self):
        store = word_store({"a": np.zeros(2, dtype=np.float32)})
        with pytest.raises(Exception, match="b"):
            extract_word_pairs([ScoredPair(sent("a b"), sent("a"), 0.0)],
                               store, store, 0.05)


class TestRetrievalLift:
    def test_remap_improves_planted_retrieval(self):
        rng = np.random.default_rng(10)
        d, n = 32, 1000
        R = random_orthogonal(rng, d)
        X = rng.normal(size=(n, d))
        Y = X @ R.T + 0.05 * rng.normal(size=(n, d))
        gold = {i: i for i in range(n)}
        before = precision_at_n(retrieval_ranks(X, Y), gold, 1)
        assert before < 0.2
        W = fit_clp(pair_set(X.T, Y.T)).matrix
        after = precision_at_n(retrieval_ranks(X @ W.T, Y), gold, 1)
        assert after >= 0.90
