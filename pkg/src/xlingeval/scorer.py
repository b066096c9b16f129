"""Metric composition: the word-level transport metric with fluency and
pseudo-reference terms, the sentence-cosine metric, and their ensemble.

All component scores are oriented higher-is-better: transport distances
enter negated, the fluency term is a mean log probability, and sentence
scores are cosines. Ensembling can z-normalize components per batch since
they live on incommensurable scales.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpusio import EmbeddingStore, TokenizedSentence
from .errors import ArgumentError
from .langmodel import NGramModel, lm_score
from .sentembed import SentenceProjection, cosine_score, sentence_embedding
from .transport import wmd


@dataclass(frozen=True)
class ScoreWeights:
    w_xlng: float = 0.5
    w_lm: float = 0.1
    w_pseudo: float = 0.4
    w_wrd: float = 0.6
    w_snt: float = 0.4
    remap_iterations: int = 1
    normalize_components: bool = True

    def __post_init__(self):
        vals = (self.w_xlng, self.w_lm, self.w_pseudo, self.w_wrd, self.w_snt)
        if not all(np.isfinite(v) for v in vals):
            raise ArgumentError("weights must be finite")
        if abs(self.w_wrd + self.w_snt - 1.0) > 1e-9:
            raise ArgumentError("w_wrd + w_snt must equal 1")
        if self.remap_iterations < 0:
            raise ArgumentError("remap_iterations must be >= 0")


PRESETS = {
    "tuned": ScoreWeights(w_xlng=0.5, w_lm=0.1, w_pseudo=0.4, w_wrd=0.6, w_snt=0.4),
    "plus": ScoreWeights(w_xlng=0.45, w_lm=0.1, w_pseudo=0.45, w_wrd=0.5, w_snt=0.5),
    "plusplus": ScoreWeights(w_xlng=1 / 3, w_lm=1 / 3, w_pseudo=1 / 3,
                             w_wrd=0.5, w_snt=0.5),
}


def preset(name: str) -> ScoreWeights:
    if name not in PRESETS:
        raise ArgumentError(f"unknown preset {name!r}; have {sorted(PRESETS)}")
    return PRESETS[name]


@dataclass(frozen=True)
class PseudoReferenceSet:
    """Target-language references index-aligned with the source file."""

    references: tuple[TokenizedSentence, ...]

    def __len__(self) -> int:
        return len(self.references)

    def __getitem__(self, i: int) -> TokenizedSentence:
        return self.references[i]


def score_wrd(x: TokenizedSentence, y: TokenizedSentence,
              src_store: EmbeddingStore, tgt_store: EmbeddingStore,
              lm: NGramModel | None, weights: ScoreWeights,
              pseudo_ref: TokenizedSentence | None = None,
              mono_store: EmbeddingStore | None = None,
              lm_value: float | None = None,
              x_index: int | None = None, y_index: int | None = None) -> float:
    """Word-level metric: negated cross-lingual transport cost, plus the
    weighted fluency term and negated hypothesis-to-pseudo-reference cost.

    `src_store` must already carry any remapping; `mono_store` (default:
    `tgt_store`) embeds both sides of the monolingual comparison.
    `lm_value` overrides the built-in model with an externally computed
    fluency score.
    """
    score = 0.0
    if weights.w_xlng != 0.0:
        X = src_store.token_matrix(x, x_index)
        Y = tgt_store.token_matrix(y, y_index)
        dist, _ = wmd(X, Y)
        score += weights.w_xlng * (-dist)
    if weights.w_lm != 0.0:
        if lm_value is None:
            if lm is None:
                raise ArgumentError("w_lm > 0 needs a language model or lm_value")
            lm_value = lm_score(lm, y)
        score += weights.w_lm * lm_value
    if weights.w_pseudo != 0.0:
        if pseudo_ref is None:
            raise ArgumentError("w_pseudo > 0 needs a pseudo reference")
        store = mono_store if mono_store is not None else tgt_store
        dist, _ = wmd(store.token_matrix(y, y_index), store.token_matrix(pseudo_ref))
        score += weights.w_pseudo * (-dist)
    return score


def score_snt(x: TokenizedSentence, y: TokenizedSentence,
              src_store: EmbeddingStore, tgt_store: EmbeddingStore,
              projection: SentenceProjection | None = None,
              x_index: int | None = None, y_index: int | None = None) -> float:
    """Cosine of (projected) pooled sentence embeddings."""
    ex = sentence_embedding(src_store, x, x_index, projection)
    ey = sentence_embedding(tgt_store, y, y_index, projection)
    return cosine_score(ex, ey)


def z_normalize(scores) -> np.ndarray:
    arr = np.asarray(scores, dtype=np.float64)
    if arr.size < 2:
        raise ArgumentError("z-normalization needs at least 2 scores")
    std = arr.std()
    if std == 0:
        raise ArgumentError("cannot z-normalize a constant score vector")
    return (arr - arr.mean()) / std


def score_ensemble(wrd_scores, snt_scores, weights: ScoreWeights) -> np.ndarray:
    """Weighted combination of the two component score batches."""
    wrd = np.asarray(wrd_scores, dtype=np.float64)
    snt = np.asarray(snt_scores, dtype=np.float64)
    if wrd.shape != snt.shape:
        raise ArgumentError("component score batches differ in length")
    if weights.normalize_components:
        if wrd.size < 2:
            raise ArgumentError("normalization needs a batch of at least 2")
        if weights.w_wrd != 0.0:
            wrd = z_normalize(wrd)
        if weights.w_snt != 0.0:
            snt = z_normalize(snt)
    return weights.w_wrd * wrd + weights.w_snt * snt
