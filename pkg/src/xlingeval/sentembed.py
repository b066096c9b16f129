"""Sentence embeddings: mean pooling, a trainable linear projection
refined with an in-batch contrastive objective, and cosine scoring.

The projection starts as the identity, so untrained sentence scores equal
raw pooled-cosine scores. Training is bit-reproducible given the seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .corpusio import EmbeddingStore, ScoredPair, TokenizedSentence
from .errors import ArgumentError

EXCLUDE_POSITIVE = "exclude-positive"
INCLUDE_POSITIVE = "include-positive"


@dataclass(frozen=True)
class ContrastiveConfig:
    temperature: float = 0.05
    batch_size: int = 256
    learning_rate: float = 5e-5
    epochs_per_iteration: int = 1
    denominator_mode: str = EXCLUDE_POSITIVE
    weight_decay: float = 0.01
    seed: int = 0  # shuffle seed; required for reproducible training

    def __post_init__(self):
        if self.temperature <= 0:
            raise ArgumentError("temperature must be positive")
        if self.batch_size < 2:
            raise ArgumentError("batch_size must be >= 2")
        if self.denominator_mode not in (EXCLUDE_POSITIVE, INCLUDE_POSITIVE):
            raise ArgumentError(f"unknown denominator_mode {self.denominator_mode!r}")


@dataclass
class SentenceProjection:
    matrix: np.ndarray
    training_log: list[tuple[int, float]] = field(default_factory=list)

    @classmethod
    def identity(cls, dimension: int) -> "SentenceProjection":
        return cls(matrix=np.eye(dimension))

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def apply(self, vecs: np.ndarray) -> np.ndarray:
        return np.asarray(vecs, dtype=np.float64) @ self.matrix.T

    def to_store(self) -> EmbeddingStore:
        entries = {f"row:{i}": row for i, row in enumerate(self.matrix)}
        return EmbeddingStore(self.dimension, "projection", entries)

    @classmethod
    def from_store(cls, store: EmbeddingStore) -> "SentenceProjection":
        if store.kind != "projection":
            raise ArgumentError(f"store kind {store.kind!r} is not a projection")
        d = store.dimension
        P = np.stack([store.vector(f"row:{i}") for i in range(d)]).astype(np.float64)
        return cls(matrix=P)

    def log_to_tsv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("step\tloss\n")
            for step, loss in self.training_log:
                fh.write(f"{step}\t{loss!r}\n")


def pool_sentence(token_embs) -> np.ndarray:
    """Arithmetic mean of token vectors."""
    arr = np.asarray(token_embs, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] == 0:
        raise ArgumentError("pool_sentence needs a non-empty list of vectors")
    return arr.mean(axis=0)


def cosine_score(x_emb, y_emb) -> float:
    x = np.asarray(x_emb, dtype=np.float64)
    y = np.asarray(y_emb, dtype=np.float64)
    nx, ny = np.linalg.norm(x), np.linalg.norm(y)
    if nx == 0 or ny == 0:
        raise ArgumentError("cosine of zero vector is undefined")
    return float(np.clip(x @ y / (nx * ny), -1.0, 1.0))


def sentence_embedding(store: EmbeddingStore, sentence: TokenizedSentence,
                       sent_index: int | None = None,
                       projection: SentenceProjection | None = None) -> np.ndarray:
    """Pooled (and optionally projected) embedding of one sentence."""
    pooled = pool_sentence(store.token_matrix(sentence, sent_index))
    if projection is not None:
        return projection.apply(pooled)
    return pooled


def contrastive_loss(batch_x: np.ndarray, batch_y: np.ndarray, P: np.ndarray,
                     config: ContrastiveConfig) -> tuple[float, np.ndarray]:
    """In-batch contrastive loss over projected pooled vectors.

    Returns the mean loss and its analytic gradient with respect to the
    projection matrix. In exclude-positive mode the denominator omits the
    j = i term, which allows negative loss values; include-positive mode
    is the standard softmax cross-entropy and is always >= 0.
    """
    U = np.asarray(batch_x, dtype=np.float64)
    V = np.asarray(batch_y, dtype=np.float64)
    if U.shape != V.shape or U.ndim != 2:
        raise ArgumentError("batches must be two equal-shape vector lists")
    n = U.shape[0]
    if n < 2:
        raise ArgumentError("batch size must be >= 2")
    tau = config.temperature

    A = U @ P.T
    B = V @ P.T
    na = np.linalg.norm(A, axis=1)
    nb = np.linalg.norm(B, axis=1)
    if np.any(na == 0) or np.any(nb == 0):
        raise ArgumentError("zero-norm projected embedding")
    Ahat = A / na[:, None]
    Bhat = B / nb[:, None]
    S = Ahat @ Bhat.T  # cosine matrix

    logits = S / tau
    if config.denominator_mode == EXCLUDE_POSITIVE:
        masked = logits.copy()
        np.fill_diagonal(masked, -np.inf)
    else:
        masked = logits
    mx = masked.max(axis=1, keepdims=True)
    lse = mx[:, 0] + np.log(np.exp(masked - mx).sum(axis=1))
    loss = float(np.mean(-np.diag(logits) + lse))

    soft = np.exp(masked - lse[:, None])  # rows sum to 1, 0 on masked diagonal
    G = (soft - np.eye(n)) / (n * tau)  # dLoss/dS

    # dS_ij/dP = (Bhat_j - S_ij Ahat_i)/na_i u_i^T + (Ahat_i - S_ij Bhat_j)/nb_j v_j^T
    GS = G * S
    Ca = (G @ Bhat - GS.sum(axis=1)[:, None] * Ahat) / na[:, None]
    Cb = (G.T @ Ahat - GS.sum(axis=0)[:, None] * Bhat) / nb[:, None]
    grad = Ca.T @ U + Cb.T @ V
    return loss, grad


def train_projection(pairs: list[ScoredPair], src_store: EmbeddingStore,
                     tgt_store: EmbeddingStore, config: ContrastiveConfig,
                     initial: SentenceProjection | None = None,
                     src_indices: list[int] | None = None,
                     tgt_indices: list[int] | None = None) -> SentenceProjection:
    """Mini-batch contrastive training of the projection with AdamW updates.

    Batches are sequential chunks after a seeded shuffle; a trailing chunk
    smaller than two pairs is dropped.
    """
    if len(pairs) < config.batch_size:
        raise ArgumentError(
            f"need at least batch_size={config.batch_size} pairs, got {len(pairs)}"
        )
    xs = np.stack([
        pool_sentence(src_store.token_matrix(
            p.source, src_indices[i] if src_indices is not None else None))
        for i, p in enumerate(pairs)
    ])
    ys = np.stack([
        pool_sentence(tgt_store.token_matrix(
            p.target, tgt_indices[i] if tgt_indices is not None else None))
        for i, p in enumerate(pairs)
    ])

    d = xs.shape[1]
    P = np.array(initial.matrix, dtype=np.float64) if initial is not None else np.eye(d)
    log = list(initial.training_log) if initial is not None else []

    beta1, beta2, eps = 0.9, 0.999, 1e-8
    m = np.zeros_like(P)
    v = np.zeros_like(P)
    rng = np.random.default_rng(config.seed)
    step = log[-1][0] if log else 0
    adam_t = 0

    for _ in range(config.epochs_per_iteration):
        order = rng.permutation(len(pairs))
        for start in range(0, len(pairs), config.batch_size):
            idx = order[start:start + config.batch_size]
            if len(idx) < 2:
                continue
            loss, grad = contrastive_loss(xs[idx], ys[idx], P, config)
            adam_t += 1
            step += 1
            m = beta1 * m + (1 - beta1) * grad
            v = beta2 * v + (1 - beta2) * grad * grad
            mhat = m / (1 - beta1 ** adam_t)
            vhat = v / (1 - beta2 ** adam_t)
            P = P - config.learning_rate * (
                mhat / (np.sqrt(vhat) + eps) + config.weight_decay * P
            )
            log.append((step, loss))

    return SentenceProjection(matrix=P, training_log=log)
