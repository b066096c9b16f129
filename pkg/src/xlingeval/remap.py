"""Cross-lingual vector-space remapping.

Two remappings are supported: an orthogonal Procrustes projection fitted
on aligned word pairs (applied to the source space), and removal of the
dominant mismatch direction between the two spaces (applied to both).
Word-pair supervision comes from transport-plan argmax alignments over
mined sentence pairs.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .corpusio import EmbeddingStore, ScoredPair
from .errors import ArgumentError, DegenerateInputError
from .transport import align_from_plan, wmd

log = logging.getLogger(__name__)

DEFAULT_MIN_FLOW = 0.05


@dataclass(frozen=True)
class WordPairSet:
    pairs: tuple[tuple[str, str], ...]
    source_matrix: np.ndarray  # d x m, one column per pair
    target_matrix: np.ndarray  # d x m

    def __post_init__(self):
        m = len(self.pairs)
        if self.source_matrix.shape[1] != m or self.target_matrix.shape[1] != m:
            raise ArgumentError("matrix column counts do not match pair count")
        if self.source_matrix.shape[0] != self.target_matrix.shape[0]:
            raise ArgumentError("source and target matrices differ in dimension")

    @property
    def dimension(self) -> int:
        return self.source_matrix.shape[0]

    def __len__(self) -> int:
        return len(self.pairs)

    def to_tsv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for s, t in self.pairs:
                fh.write(f"{s}\t{t}\n")


@dataclass(frozen=True)
class ProjectionMap:
    kind: str  # "orthogonal" | "bias-removal"
    matrix: np.ndarray | None = None  # d x d, orthogonal kind
    bias_vector: np.ndarray | None = None  # unit vector, bias-removal kind
    degenerate: bool = field(default=False, compare=False)

    def __post_init__(self):
        if self.kind == "orthogonal":
            W = self.matrix
            if W is None or W.ndim != 2 or W.shape[0] != W.shape[1]:
                raise ArgumentError("orthogonal map needs a square matrix")
            err = np.abs(W.T @ W - np.eye(W.shape[0])).max()
            if err > 1e-6:
                raise ArgumentError(f"matrix is not orthogonal (max dev {err:.2e})")
        elif self.kind == "bias-removal":
            v = self.bias_vector
            if v is None or v.ndim != 1:
                raise ArgumentError("bias-removal map needs a vector")
            if abs(np.linalg.norm(v) - 1.0) > 1e-9:
                raise ArgumentError("bias vector must have unit norm")
        else:
            raise ArgumentError(f"unknown projection kind {self.kind!r}")

    @property
    def dimension(self) -> int:
        if self.kind == "orthogonal":
            return self.matrix.shape[0]
        return self.bias_vector.shape[0]

    def to_store(self) -> EmbeddingStore:
        if self.kind == "orthogonal":
            entries = {f"row:{i}": row for i, row in enumerate(self.matrix)}
            return EmbeddingStore(self.dimension, "orthogonal-map", entries)
        return EmbeddingStore(self.dimension, "bias-vector", {"v": self.bias_vector})

    @classmethod
    def from_store(cls, store: EmbeddingStore) -> "ProjectionMap":
        if store.kind == "orthogonal-map":
            d = store.dimension
            W = np.stack([store.vector(f"row:{i}") for i in range(d)]).astype(np.float64)
            return cls(kind="orthogonal", matrix=W)
        if store.kind == "bias-vector":
            v = store.vector("v").astype(np.float64)
            v = v / np.linalg.norm(v)
            return cls(kind="bias-removal", bias_vector=v)
        raise ArgumentError(f"store kind {store.kind!r} is not a projection map")


def fit_clp(pairs: WordPairSet, normalize: bool = False,
            center: bool = False) -> ProjectionMap:
    """Orthogonal least-squares map from source columns onto target columns.

    Solves min ||W X - Y||_F over orthogonal W via the SVD of Y X^T.
    """
    X = pairs.source_matrix.astype(np.float64)
    Y = pairs.target_matrix.astype(np.float64)
    d, m = X.shape
    if m == 0:
        raise ArgumentError("empty word-pair set")
    if np.any(np.linalg.norm(X, axis=0) == 0) or np.any(np.linalg.norm(Y, axis=0) == 0):
        raise ArgumentError("zero columns in word-pair matrices")
    if m < d:
        log.warning("fitting %dx%d orthogonal map from only %d pairs", d, d, m)
    if normalize:
        X = X / np.linalg.norm(X, axis=0, keepdims=True)
        Y = Y / np.linalg.norm(Y, axis=0, keepdims=True)
    if center:
        X = X - X.mean(axis=1, keepdims=True)
        Y = Y - Y.mean(axis=1, keepdims=True)
    M = Y @ X.T
    U, s, Vt = np.linalg.svd(M)
    degenerate = bool(np.min(s) < 1e-12 * max(1.0, np.max(s)))
    if degenerate:
        log.warning("rank-deficient cross-covariance; optimum is not unique")
    W = U @ Vt
    return ProjectionMap(kind="orthogonal", matrix=W, degenerate=degenerate)


def fit_umd(pairs: WordPairSet) -> ProjectionMap:
    """Dominant direction of the per-pair difference vectors, unit-normalized.

    The sign is fixed so the first nonzero component is positive.
    """
    if len(pairs) < 2:
        raise ArgumentError("need at least 2 word pairs")
    Q = (pairs.source_matrix - pairs.target_matrix).T.astype(np.float64)  # m x d
    if np.allclose(Q, 0.0):
        raise DegenerateInputError("all word pairs have identical embeddings")
    _, _, Vt = np.linalg.svd(Q, full_matrices=False)
    v = Vt[0]
    v = v / np.linalg.norm(v)
    nz = np.nonzero(np.abs(v) > 1e-12)[0]
    if nz.size and v[nz[0]] < 0:
        v = -v
    return ProjectionMap(kind="bias-removal", bias_vector=v)


def apply_remap(store: EmbeddingStore, pmap: ProjectionMap) -> EmbeddingStore:
    """Return a new store with every vector remapped; keys are preserved.

    Orthogonal maps should be applied to the source-side store only;
    bias removal to both sides (callers own that policy).
    """
    if store.dimension != pmap.dimension:
        raise ArgumentError(
            f"store dimension {store.dimension} != map dimension {pmap.dimension}"
        )
    mat = np.stack(list(store.entries.values())).astype(np.float64)
    if pmap.kind == "orthogonal":
        mapped = mat @ pmap.matrix.T
    else:
        v = pmap.bias_vector
        mapped = mat - np.outer(mat @ v, v)
    entries = {
        key: mapped[i] for i, key in enumerate(store.entries.keys())
    }
    return EmbeddingStore(store.dimension, store.kind, entries)


def extract_word_pairs(pairs: list[ScoredPair], src_store: EmbeddingStore,
                       tgt_store: EmbeddingStore,
                       min_flow: float = DEFAULT_MIN_FLOW) -> WordPairSet:
    """Transport-plan argmax alignments over sentence pairs, deduplicated.

    Duplicate word pairs keep their first occurrence.
    """
    seen: dict[tuple[str, str], None] = {}
    src_vecs, tgt_vecs = [], []
    for sp in pairs:
        X = src_store.token_matrix(sp.source)
        Y = tgt_store.token_matrix(sp.target)
        _, plan = wmd(X, Y)
        for s_word, t_word in align_from_plan(plan, sp.source, sp.target, min_flow):
            if (s_word, t_word) in seen:
                continue
            seen[(s_word, t_word)] = None
            src_vecs.append(src_store.vector(s_word))
            tgt_vecs.append(tgt_store.vector(t_word))
    d = src_store.dimension
    if not seen:
        X = np.zeros((d, 0))
        Y = np.zeros((d, 0))
    else:
        X = np.stack(src_vecs, axis=1).astype(np.float64)
        Y = np.stack(tgt_vecs, axis=1).astype(np.float64)
    return WordPairSet(pairs=tuple(seen.keys()), source_matrix=X, target_matrix=Y)
