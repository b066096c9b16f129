"""Optimal transport between token-embedding sequences.

Word mover's distance is solved exactly as a transportation LP; the
centroid distance is its linear-time lower bound used for candidate
prefetching. All functions are pure and safe to call in parallel.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import sparse
from scipy.optimize import linear_sum_assignment, linprog

from .corpusio import TokenizedSentence
from .errors import ArgumentError

MAX_TOKENS = 256  # exact solve scales cubically; longer inputs are rejected

MARGINAL_TOL = 1e-9


@dataclass(frozen=True)
class TransportPlan:
    flows: np.ndarray  # (|x|, |y|), non-negative
    source_marginal: np.ndarray
    target_marginal: np.ndarray

    def __post_init__(self):
        f = self.flows
        if np.any(f < -MARGINAL_TOL):
            raise ArgumentError("negative flows in transport plan")
        if np.abs(f.sum(axis=1) - self.source_marginal).max() > 1e-6:
            raise ArgumentError("row sums do not match source marginal")
        if np.abs(f.sum(axis=0) - self.target_marginal).max() > 1e-6:
            raise ArgumentError("column sums do not match target marginal")


def _as_matrix(embs, name: str) -> np.ndarray:
    arr = np.asarray(embs, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] == 0:
        raise ArgumentError(f"{name}: expected a non-empty list of vectors")
    return arr


def cost_matrix(x_embs, y_embs) -> np.ndarray:
    """Pairwise Euclidean distances, shape (|x|, |y|)."""
    X = _as_matrix(x_embs, "x_embs")
    Y = _as_matrix(y_embs, "y_embs")
    if X.shape[1] != Y.shape[1]:
        raise ArgumentError(
            f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]}"
        )
    diff = X[:, None, :] - Y[None, :, :]
    return np.sqrt(np.maximum(np.einsum("ijk,ijk->ij", diff, diff), 0.0))


def _check_marginals(n: int, m: int, marginals) -> tuple[np.ndarray, np.ndarray]:
    if marginals is None:
        return np.full(n, 1.0 / n), np.full(m, 1.0 / m)
    a, b = (np.asarray(v, dtype=np.float64) for v in marginals)
    if a.shape != (n,) or b.shape != (m,):
        raise ArgumentError("marginal lengths do not match input lengths")
    if np.any(a < 0) or np.any(b < 0):
        raise ArgumentError("marginals must be non-negative")
    for name, v in (("source", a), ("target", b)):
        s = v.sum()
        if s < MARGINAL_TOL:
            raise ArgumentError(f"degenerate {name} marginal: sums to {s}")
        if abs(s - 1.0) > 1e-9:
            raise ArgumentError(f"{name} marginal sums to {s}, expected 1")
    return a, b


@lru_cache(maxsize=512)
def _constraint_matrix(n: int, m: int) -> sparse.csr_matrix:
    # Row-sum constraints for all n rows, column-sum for the first m-1
    # columns (the last is implied, keeping the system full-rank).
    rows, cols = [], []
    for i in range(n):
        rows.extend([i] * m)
        cols.extend(range(i * m, (i + 1) * m))
    for j in range(m - 1):
        rows.extend([n + j] * n)
        cols.extend(range(j, n * m, m))
    data = np.ones(len(rows))
    return sparse.csr_matrix((data, (rows, cols)), shape=(n + m - 1, n * m))


def wmd(x_embs, y_embs, marginals=None, method: str = "exact",
        sinkhorn_reg: float = 0.01) -> tuple[float, TransportPlan]:
    """Minimum-cost transport between two token-embedding sets.

    Returns the optimal cost and the optimizing plan. `method="sinkhorn"`
    opts into an entropic approximation (never used by oracle paths).
    """
    C = cost_matrix(x_embs, y_embs)
    n, m = C.shape
    if n > MAX_TOKENS or m > MAX_TOKENS:
        raise ArgumentError(f"sentence longer than {MAX_TOKENS} tokens")
    a, b = _check_marginals(n, m, marginals)

    if method == "sinkhorn":
        F = _sinkhorn(C, a, b, sinkhorn_reg)
    elif method in ("exact", "lp"):
        uniform = (n == m and np.allclose(a, 1.0 / n, atol=1e-12)
                   and np.allclose(b, 1.0 / m, atol=1e-12))
        if method == "exact" and uniform:
            # a permutation matching is an optimal vertex of the uniform
            # equal-size transport polytope, so the assignment solver is exact
            rows, cols = linear_sum_assignment(C)
            F = np.zeros_like(C)
            F[rows, cols] = 1.0 / n
        else:
            A = _constraint_matrix(n, m)
            beq = np.concatenate([a, b[:-1]])
            res = linprog(C.ravel(), A_eq=A, b_eq=beq, bounds=(0, None),
                          method="highs")
            if not res.success:
                raise ArgumentError(f"transport LP failed: {res.message}")
            F = np.maximum(res.x.reshape(n, m), 0.0)
    else:
        raise ArgumentError(f"unknown method {method!r}")

    plan = TransportPlan(flows=F, source_marginal=a, target_marginal=b)
    return float((F * C).sum()), plan


def _sinkhorn(C, a, b, reg, iters: int = 1000):
    # log-domain updates keep small regularizations from underflowing
    f = np.zeros_like(a)
    g = np.zeros_like(b)
    loga, logb = np.log(a), np.log(b)
    M = -C / reg
    for _ in range(iters):
        g = reg * (logb - _logsumexp_rows((M + f[:, None] / reg).T))
        f = reg * (loga - _logsumexp_rows(M + g[None, :] / reg))
    return np.exp(M + f[:, None] / reg + g[None, :] / reg)


def _logsumexp_rows(X):
    mx = X.max(axis=1, keepdims=True)
    return (mx + np.log(np.exp(X - mx).sum(axis=1, keepdims=True)))[:, 0]


def wcd(x_embs, y_embs, marginals=None) -> float:
    """Distance between weighted centroids; a lower bound on wmd."""
    X = _as_matrix(x_embs, "x_embs")
    Y = _as_matrix(y_embs, "y_embs")
    if X.shape[1] != Y.shape[1]:
        raise ArgumentError(f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]}")
    a, b = _check_marginals(X.shape[0], Y.shape[0], marginals)
    return float(np.linalg.norm(a @ X - b @ Y))


def wcd_pool(embs, marginal=None) -> np.ndarray:
    """Weighted centroid of one side, for batched centroid retrieval."""
    X = _as_matrix(embs, "embs")
    if marginal is None:
        return X.mean(axis=0)
    return np.asarray(marginal, dtype=np.float64) @ X


def align_from_plan(plan: TransportPlan, x: TokenizedSentence,
                    y: TokenizedSentence, min_flow: float) -> list[tuple[str, str]]:
    """Argmax-flow word alignment: (x_i, y_j*) with j* = argmax_j F_ij.

    Pairs below `min_flow` are dropped; ties break to the lowest j.
    """
    F = plan.flows
    if F.shape != (len(x.tokens), len(y.tokens)):
        raise ArgumentError(
            f"plan shape {F.shape} does not match sentence lengths "
            f"({len(x.tokens)}, {len(y.tokens)})"
        )
    pairs = []
    for i, token in enumerate(x.tokens):
        j = int(np.argmax(F[i]))  # np.argmax takes the first maximum
        if F[i, j] >= min_flow:
            pairs.append((token, y.tokens[j]))
    return pairs


def plan_to_tsv(plan: TransportPlan, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for i in range(plan.flows.shape[0]):
            for j in range(plan.flows.shape[1]):
                fh.write(f"{i}\t{j}\t{plan.flows[i, j]!r}\n")
