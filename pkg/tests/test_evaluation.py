import math

import numpy as np
import pytest

from xlingeval.errors import ArgumentError, DegenerateInputError
from xlingeval.evaluation import (compare_metrics, pearson, precision_at_n,
                                  report_tsv, retrieval_ranks)


class TestPearson:
    def test_hand_fixture(self):
        assert pearson([1, 2, 3], [1, 3, 2]).r == pytest.approx(0.5, abs=1e-12)

    def test_perfect_correlation(self):
        res = pearson([1, 2, 3, 4], [2, 4, 6, 8])
        assert res.r == 1.0
        assert res.fisher_ci_low == res.fisher_ci_high == 1.0

    def test_anti_correlation(self):
        assert pearson([1, 2, 3], [3, 2, 1]).r == pytest.approx(-1.0)

    def test_fisher_interval_hand(self):
        rng = np.random.default_rng(0)
        x = rng.normal(size=10)
        y = x + rng.normal(size=10)
        res = pearson(x, y)
        half = 1.96 / math.sqrt(10 - 3)
        assert res.fisher_ci_low == pytest.approx(math.tanh(math.atanh(res.r) - half))
        assert res.fisher_ci_high == pytest.approx(math.tanh(math.atanh(res.r) + half))
        assert res.fisher_ci_low <= res.r <= res.fisher_ci_high

    def test_constant_vector(self):
        with pytest.raises(DegenerateInputError):
            pearson([1, 1, 1], [1, 2, 3])

    def test_too_short(self):
        with pytest.raises(ArgumentError):
            pearson([1, 2], [1, 2])

    def test_length_mismatch(self):
        with pytest.raises(ArgumentError):
            pearson([1, 2, 3], [1, 2])


class TestPrecisionAtN:
    def test_all_correct_at_one(self):
        retrieved = {0: [0, 1], 1: [1, 0]}
        assert precision_at_n(retrieved, {0: 0, 1: 1}, 1) == 1.0

    def test_half_correct(self):
        retrieved = {0: [0, 1], 1: [0, 1]}
        assert precision_at_n(retrieved, {0: 0, 1: 1}, 1) == 0.5

    def test_wider_n_recovers(self):
        retrieved = {0: [1, 0]}
        assert precision_at_n(retrieved, {0: 0}, 1) == 0.0
        assert precision_at_n(retrieved, {0: 0}, 2) == 1.0

    def test_missing_query(self):
        with pytest.raises(ArgumentError):
            precision_at_n({}, {0: 0}, 1)

    def test_bad_n(self):
        with pytest.raises(ArgumentError):
            precision_at_n({0: [0]}, {0: 0}, 0)


class TestRetrievalRanks:
    def test_cosine_hand(self):
        Q = np.array([[1.0, 0.0]])
        C = np.array([[0.0, 1.0], [1.0, 0.1], [-1.0, 0.0]])
        assert retrieval_ranks(Q, C)[0] == [1, 0, 2]

    def test_euclidean_hand(self):
        Q = np.array([[0.0]])
        C = np.array([[3.0], [-1.0], [2.0]])
        assert retrieval_ranks(Q, C, metric="euclidean")[0] == [1, 2, 0]

    def test_zero_norm_rejected(self):
        with pytest.raises(ArgumentError):
            retrieval_ranks(np.zeros((1, 2)), np.ones((2, 2)))

    def test_unknown_metric(self):
        with pytest.raises(ArgumentError):
            retrieval_ranks(np.ones((1, 2)), np.ones((1, 2)), metric="nope")


class TestCompareMetrics:
    def test_identical_metrics(self):
        h = [1.0, 2.0, 3.0, 4.0]
        a = [1.1, 1.9, 3.2, 3.8]
        assert compare_metrics(a, a, h) == 1.0

    def test_deterministic_given_seed(self):
        rng = np.random.default_rng(1)
        h = rng.normal(size=30)
        a = h + 0.5 * rng.normal(size=30)
        b = rng.normal(size=30)
        p1 = compare_metrics(a, b, h, seed=5, resamples=500)
        p2 = compare_metrics(a, b, h, seed=5, resamples=500)
        assert p1 == p2

    def test_clear_winner_small_p(self):
        rng = np.random.default_rng(2)
        h = rng.normal(size=100)
        good = h + 0.1 * rng.normal(size=100)
        bad = rng.normal(size=100)
        p = compare_metrics(good, bad, h, resamples=2000)
        assert p < 0.05

    def test_p_in_unit_interval(self):
        rng = np.random.default_rng(3)
        for _ in range(5):
            h = rng.normal(size=20)
            a = rng.normal(size=20)
            b = rng.normal(size=20)
            p = compare_metrics(a, b, h, resamples=200)
            assert 0.0 <= p <= 1.0

    def test_ttest_mode_runs(self):
        rng = np.random.default_rng(4)
        h = rng.normal(size=50)
        a = h + rng.normal(size=50)
        b = rng.normal(size=50)
        p = compare_metrics(a, b, h, method="ttest")
        assert 0.0 <= p <= 1.0

    def test_unknown_method(self):
        with pytest.raises(ArgumentError):
            compare_metrics([1.0, 2.0], [2.0, 1.0], [1.0, 2.0], method="nope")


class TestReportTsv:
    def test_format(self, tmp_path):
        path = tmp_path / "r.tsv"
        report_tsv([("metric-a", "de-en", 0.5), ("metric-b", "ru-en", -0.25)], path)
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "metric\tlang_pair\tpearson_r"
        assert lines[1] == "metric-a\tde-en\t0.5"
        assert len(lines) == 3
