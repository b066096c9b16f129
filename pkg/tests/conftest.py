"""Shared fixtures: synthetic bilingual pools with planted correspondences."""

from __future__ import annotations

import itertools

import numpy as np
from scipy.linalg import expm

from xlingeval.corpusio import EmbeddingStore, TokenizedSentence


def sent(text: str) -> TokenizedSentence:
    return TokenizedSentence(text=text, tokens=tuple(text.split()))


def word_store(vectors: dict[str, np.ndarray]) -> EmbeddingStore:
    dim = len(next(iter(vectors.values())))
    return EmbeddingStore(dimension=dim, kind="static-word", entries=dict(vectors))


def random_orthogonal(rng: np.random.Generator, d: int) -> np.ndarray:
    Q, R = np.linalg.qr(rng.normal(size=(d, d)))
    return Q * np.sign(np.diag(R))


def mild_rotation(rng: np.random.Generator, d: int, strength: float) -> np.ndarray:
    """Orthogonal matrix exp(strength * A) for a random unit-scaled skew A."""
    A = rng.normal(size=(d, d))
    A = (A - A.T) / 2
    A = A / np.linalg.norm(A, 2)
    return expm(strength * A)


def permutation_wmd_oracle(C: np.ndarray) -> float:
    """Brute-force optimum over permutation matchings (equal-size, uniform)."""
    n = C.shape[0]
    assert C.shape == (n, n)
    best = np.inf
    for perm in itertools.permutations(range(n)):
        cost = sum(C[i, perm[i]] for i in range(n)) / n
        best = min(best, cost)
    return best


def planted_pools(rng: np.random.Generator, n_sent: int, d: int,
                  tokens_per_sent: int, rotation: np.ndarray, sigma: float):
    """Bilingual pools where target sentence i translates source sentence i.

    Source token vectors are random unit-scale Gaussians; each target token
    vector is the rotated source vector plus Gaussian noise.
    """
    src_vecs: dict[str, np.ndarray] = {}
    tgt_vecs: dict[str, np.ndarray] = {}
    src_pool, tgt_pool = [], []
    for i in range(n_sent):
        s_tokens, t_tokens = [], []
        for t in range(tokens_per_sent):
            v = rng.normal(size=d)
            sw, tw = f"s{i}w{t}", f"t{i}w{t}"
            src_vecs[sw] = v
            tgt_vecs[tw] = rotation @ v + sigma * rng.normal(size=d)
            s_tokens.append(sw)
            t_tokens.append(tw)
        src_pool.append(sent(" ".join(s_tokens)))
        tgt_pool.append(sent(" ".join(t_tokens)))
    return src_pool, tgt_pool, word_store(src_vecs), word_store(tgt_vecs)
