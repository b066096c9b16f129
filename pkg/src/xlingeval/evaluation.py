"""Segment-level evaluation: Pearson correlation with human judgments,
precision-at-N for parallel sentence matching, and metric comparison via
a seeded paired bootstrap (with a two-sample t-test compatibility mode).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import ArgumentError, DegenerateInputError


@dataclass(frozen=True)
class CorrelationResult:
    r: float
    n: int
    fisher_ci_low: float
    fisher_ci_high: float


def pearson(metric_scores, human_scores) -> CorrelationResult:
    """Product-moment correlation with a 95% Fisher-z interval."""
    m = np.asarray(metric_scores, dtype=np.float64)
    h = np.asarray(human_scores, dtype=np.float64)
    if m.shape != h.shape or m.ndim != 1:
        raise ArgumentError("score vectors must be 1-d and equal-length")
    n = m.size
    if n < 3:
        raise ArgumentError("need at least 3 samples")
    if m.std() == 0 or h.std() == 0:
        raise DegenerateInputError("correlation undefined for a constant vector")
    r = float(np.corrcoef(m, h)[0, 1])
    r = max(-1.0, min(1.0, r))
    if abs(r) == 1.0 or n <= 3:
        lo, hi = r, r
    else:
        z = math.atanh(r)
        half = 1.96 / math.sqrt(n - 3)
        lo, hi = math.tanh(z - half), math.tanh(z + half)
    return CorrelationResult(r=r, n=n, fisher_ci_low=min(lo, r),
                             fisher_ci_high=max(hi, r))


def precision_at_n(retrieved: dict[int, list[int]], gold: dict[int, int],
                   n: int) -> float:
    """Fraction of queries whose gold index appears in the top n retrieved."""
    if n < 1:
        raise ArgumentError("n must be >= 1")
    if not gold:
        raise ArgumentError("empty gold map")
    hits = 0
    for query, answer in gold.items():
        if query not in retrieved:
            raise ArgumentError(f"query {query} has no retrieved candidates")
        if answer in retrieved[query][:n]:
            hits += 1
    return hits / len(gold)


def retrieval_ranks(query_embs, candidate_embs, metric: str = "cosine") -> dict[int, list[int]]:
    """Full candidate rankings per query, for feeding precision_at_n."""
    Q = np.asarray(query_embs, dtype=np.float64)
    C = np.asarray(candidate_embs, dtype=np.float64)
    if metric == "cosine":
        qn = np.linalg.norm(Q, axis=1, keepdims=True)
        cn = np.linalg.norm(C, axis=1, keepdims=True)
        if np.any(qn == 0) or np.any(cn == 0):
            raise ArgumentError("zero-norm embedding in retrieval")
        sims = (Q / qn) @ (C / cn).T
        order = np.argsort(-sims, axis=1, kind="stable")
    elif metric == "euclidean":
        d = np.linalg.norm(Q[:, None, :] - C[None, :, :], axis=2)
        order = np.argsort(d, axis=1, kind="stable")
    else:
        raise ArgumentError(f"unknown retrieval metric {metric!r}")
    return {i: list(map(int, order[i])) for i in range(Q.shape[0])}


def compare_metrics(scores_a, scores_b, human, method: str = "bootstrap",
                    resamples: int = 10000, seed: int = 0) -> float:
    """p-value for equal correlation of two metrics with the human scores.

    The default is a paired bootstrap over segments; "ttest" imitates a
    two-sample t-test over per-segment standardized score-human products
    (a literal but statistically loose reading, provided for parity with
    older reporting conventions).
    """
    a = np.asarray(scores_a, dtype=np.float64)
    b = np.asarray(scores_b, dtype=np.float64)
    h = np.asarray(human, dtype=np.float64)
    if not (a.shape == b.shape == h.shape) or a.ndim != 1:
        raise ArgumentError("need three equal-length score vectors")
    if method == "ttest":
        za = (a - a.mean()) / a.std()
        zb = (b - b.mean()) / b.std()
        zh = (h - h.mean()) / h.std()
        return float(stats.ttest_ind(za * zh, zb * zh).pvalue)
    if method != "bootstrap":
        raise ArgumentError(f"unknown method {method!r}")
    if np.array_equal(a, b):
        return 1.0
    rng = np.random.default_rng(seed)
    n = a.size
    pos = neg = 0
    for _ in range(resamples):
        idx = rng.integers(0, n, size=n)
        if np.ptp(h[idx]) == 0 or np.ptp(a[idx]) == 0 or np.ptp(b[idx]) == 0:
            continue  # resample degenerate for correlation; skip
        ra = np.corrcoef(a[idx], h[idx])[0, 1]
        rb = np.corrcoef(b[idx], h[idx])[0, 1]
        if ra - rb >= 0:
            pos += 1
        if ra - rb <= 0:
            neg += 1
    if pos + neg == 0:
        return 1.0
    return float(min(1.0, 2.0 * min(pos, neg) / (pos + neg)))


def report_tsv(rows: list[tuple[str, str, float]], path) -> None:
    """Per-language-pair correlation report: (metric, language pair, r)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("metric\tlang_pair\tpearson_r\n")
        for metric, pair, r in rows:
            fh.write(f"{metric}\t{pair}\t{r!r}\n")
