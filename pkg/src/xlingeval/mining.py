"""Pseudo-parallel sentence mining and corpus filtering.

Two mining strategies: centroid-prefetch + exact transport refinement
(word-level stores), and ratio-margin scoring over sentence embeddings.
Filtering drops too-short/too-long sentences, high-overlap pairs, and
optionally sentences failing a language predicate.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .corpusio import EmbeddingStore, ScoredPair, TokenizedSentence
from .errors import ArgumentError
from .transport import wcd_pool, wmd


@dataclass(frozen=True)
class MiningConfig:
    strategy: str = "wmd-prefetch"  # or "ratio-margin"
    k_prefetch: int = 20
    k_margin: int = 5
    extraction_rate: float = 0.05
    dedup: bool = False

    def __post_init__(self):
        if self.strategy not in ("wmd-prefetch", "ratio-margin"):
            raise ArgumentError(f"unknown mining strategy {self.strategy!r}")
        if not (0.0 < self.extraction_rate <= 1.0):
            raise ArgumentError("extraction_rate must be in (0, 1]")
        if self.k_prefetch < 1 or self.k_margin < 1:
            raise ArgumentError("k values must be >= 1")


@dataclass(frozen=True)
class FilterConfig:
    min_tokens: int = 3
    max_tokens: int = 30
    max_overlap: float = 0.5
    language_filter: object = None  # callable(TokenizedSentence) -> bool, True = keep

    def __post_init__(self):
        if not (0 < self.min_tokens <= self.max_tokens):
            raise ArgumentError("need 0 < min_tokens <= max_tokens")
        if not (0.0 <= self.max_overlap <= 1.0):
            raise ArgumentError("max_overlap must be in [0, 1]")


@dataclass
class FilterReport:
    input_count: int = 0
    dropped_length: int = 0
    dropped_overlap: int = 0
    dropped_language: int = 0
    kept: int = 0

    def lines(self) -> list[str]:
        return [
            f"input\t{self.input_count}",
            f"dropped_length\t{self.dropped_length}",
            f"dropped_overlap\t{self.dropped_overlap}",
            f"dropped_language\t{self.dropped_language}",
            f"kept\t{self.kept}",
        ]


def levenshtein(a: str, b: str) -> int:
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    prev = np.arange(len(b) + 1)
    barr = np.frombuffer(b.encode("utf-32-le"), dtype=np.uint32)
    for i, ch in enumerate(a, start=1):
        cur = np.empty(len(b) + 1, dtype=prev.dtype)
        cur[0] = i
        sub = prev[:-1] + (barr != ord(ch))
        np.minimum(sub, prev[1:] + 1, out=cur[1:])
        # insertion needs a sequential pass
        for j in range(1, len(b) + 1):
            if cur[j - 1] + 1 < cur[j]:
                cur[j] = cur[j - 1] + 1
        prev = cur
    return int(prev[-1])


def char_overlap(a: str, b: str) -> float:
    """Length-normalized edit-distance similarity in [0, 1]."""
    longest = max(len(a), len(b))
    if longest == 0:
        return 1.0
    return 1.0 - levenshtein(a, b) / longest


def _length_ok(sent: TokenizedSentence, cfg: FilterConfig) -> bool:
    return cfg.min_tokens <= len(sent.tokens) <= cfg.max_tokens


def filter_corpus(items, config: FilterConfig):
    """Filter a corpus (sentences) or mined pairs; returns (kept, report)."""
    items = list(items)
    report = FilterReport(input_count=len(items))
    kept = []
    for item in items:
        if isinstance(item, ScoredPair):
            if not (_length_ok(item.source, config) and _length_ok(item.target, config)):
                report.dropped_length += 1
                continue
            if char_overlap(item.source.text, item.target.text) > config.max_overlap:
                report.dropped_overlap += 1
                continue
            if config.language_filter is not None and not (
                config.language_filter(item.source) and config.language_filter(item.target)
            ):
                report.dropped_language += 1
                continue
        else:
            if not _length_ok(item, config):
                report.dropped_length += 1
                continue
            if config.language_filter is not None and not config.language_filter(item):
                report.dropped_language += 1
                continue
        kept.append(item)
    report.kept = len(kept)
    return kept, report


def select_top_rate(pairs: list[ScoredPair], rate: float) -> list[ScoredPair]:
    """Keep the ceil(rate * n) best-scoring pairs; ties keep input order."""
    if not (0.0 < rate <= 1.0):
        raise ArgumentError("rate must be in (0, 1]")
    if not pairs:
        return []
    ranked = sorted(range(len(pairs)), key=lambda i: (-pairs[i].score, i))
    keep = math.ceil(rate * len(pairs))
    return [pairs[i] for i in ranked[:keep]]


def dedup_pairs(pairs: list[ScoredPair]) -> list[ScoredPair]:
    """Drop any pair whose source or target text appeared earlier in the list."""
    seen_src: set[str] = set()
    seen_tgt: set[str] = set()
    out = []
    for p in pairs:
        if p.source.text in seen_src or p.target.text in seen_tgt:
            continue
        seen_src.add(p.source.text)
        seen_tgt.add(p.target.text)
        out.append(p)
    return out


def mine_wmd(src_pool: list[TokenizedSentence], tgt_pool: list[TokenizedSentence],
             src_store: EmbeddingStore, tgt_store: EmbeddingStore,
             config: MiningConfig, workers: int = 1) -> list[ScoredPair]:
    """Centroid-prefetch mining with exact transport refinement.

    Per source sentence: take the k_prefetch targets closest by centroid
    distance, solve exact transport on those, and keep the argmin target
    with score = -distance. Output is sorted by score descending with
    (source index, target index) tie-breaks, independent of worker count.
    """
    if not src_pool or not tgt_pool:
        raise ArgumentError("empty mining pool")
    src_mats = [
        src_store.token_matrix(s, i if src_store.kind == "contextual-token" else None)
        for i, s in enumerate(src_pool)
    ]
    tgt_mats = [
        tgt_store.token_matrix(t, j if tgt_store.kind == "contextual-token" else None)
        for j, t in enumerate(tgt_pool)
    ]
    tgt_centroids = np.stack([wcd_pool(m) for m in tgt_mats])
    k = min(config.k_prefetch, len(tgt_pool))

    def best_for(i: int) -> tuple[float, int]:
        centroid = wcd_pool(src_mats[i])
        dists = np.linalg.norm(tgt_centroids - centroid, axis=1)
        order = np.lexsort((np.arange(len(dists)), dists))
        candidates = [(wmd(src_mats[i], tgt_mats[j])[0], int(j)) for j in order[:k]]
        best_d, best_j = min(candidates)  # ties break to the lowest target index
        return best_d, best_j

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(best_for, range(len(src_pool))))
    else:
        results = [best_for(i) for i in range(len(src_pool))]

    items = [
        (i, j, -d) for i, (d, j) in enumerate(results)
    ]
    items.sort(key=lambda t: (-t[2], t[0], t[1]))
    return [ScoredPair(src_pool[i], tgt_pool[j], s) for i, j, s in items]


def ratio_margin(cos_xy: float, nx_sims, ny_sims, k: int) -> float:
    """Cosine of the pair over the average similarity of both neighborhoods."""
    denom = sum(nx_sims) / (2 * k) + sum(ny_sims) / (2 * k)
    return cos_xy / denom


def _topk_mean(sims: np.ndarray, k: int) -> np.ndarray:
    """Row-wise mean of the k largest entries."""
    part = np.partition(sims, -k, axis=1)[:, -k:]
    return part.mean(axis=1)


def margin_matrix(src_embs: np.ndarray, tgt_embs: np.ndarray, k: int) -> np.ndarray:
    """Pairwise ratio-margin scores over unit-normalized sentence embeddings."""
    src = np.asarray(src_embs, dtype=np.float64)
    tgt = np.asarray(tgt_embs, dtype=np.float64)
    src_norms = np.linalg.norm(src, axis=1)
    tgt_norms = np.linalg.norm(tgt, axis=1)
    if np.any(src_norms == 0) or np.any(tgt_norms == 0):
        raise ArgumentError("zero-norm sentence embedding")
    if k >= min(len(src), len(tgt)):
        raise ArgumentError("k_margin must be smaller than both pool sizes")
    cos = (src / src_norms[:, None]) @ (tgt / tgt_norms[:, None]).T
    nx = _topk_mean(cos, k)  # per source: mean cosine of its k nearest targets
    ny = _topk_mean(cos.T, k)  # per target: mean cosine of its k nearest sources
    return cos / (0.5 * (nx[:, None] + ny[None, :]))


def mine_margin(src_pool: list[TokenizedSentence], tgt_pool: list[TokenizedSentence],
                src_embs: np.ndarray, tgt_embs: np.ndarray,
                config: MiningConfig) -> list[ScoredPair]:
    """Forward ratio-margin mining: per source, the argmax-margin target."""
    if len(src_pool) != len(src_embs) or len(tgt_pool) != len(tgt_embs):
        raise ArgumentError("pool and embedding counts differ")
    M = margin_matrix(src_embs, tgt_embs, config.k_margin)
    best = M.argmax(axis=1)  # first maximum wins on ties
    items = [(i, int(best[i]), float(M[i, best[i]])) for i in range(len(src_pool))]
    items.sort(key=lambda t: (-t[2], t[0], t[1]))
    pairs = [ScoredPair(src_pool[i], tgt_pool[j], s) for i, j, s in items]
    if config.dedup:
        pairs = dedup_pairs(pairs)
    return pairs


@dataclass
class TrigramLangClassifier:
    """Character-trigram naive Bayes over two monolingual pools.

    A lightweight stand-in for an external language-identification tool;
    `predicate(side)` yields a filter_corpus-compatible callable.
    """

    log_priors: np.ndarray = field(default=None)
    tables: list[dict] = field(default_factory=list)
    fallback: float = 0.0

    @staticmethod
    def _trigrams(text: str):
        padded = f"  {text.lower()}  "
        return (padded[i:i + 3] for i in range(len(padded) - 2))

    def fit(self, pool_a: list[TokenizedSentence], pool_b: list[TokenizedSentence]):
        counts = []
        for pool in (pool_a, pool_b):
            table: dict[str, float] = {}
            for sent in pool:
                for tri in self._trigrams(sent.text):
                    table[tri] = table.get(tri, 0.0) + 1.0
            counts.append(table)
        vocab = set(counts[0]) | set(counts[1])
        v = max(len(vocab), 1)
        self.tables = []
        for table in counts:
            total = sum(table.values()) + v
            self.tables.append(
                {tri: math.log((table.get(tri, 0.0) + 1.0) / total) for tri in vocab}
            )
        self.fallback = -math.log(v)
        n_a, n_b = max(len(pool_a), 1), max(len(pool_b), 1)
        self.log_priors = np.log([n_a / (n_a + n_b), n_b / (n_a + n_b)])
        return self

    def predict(self, sentence: TokenizedSentence) -> int:
        scores = list(self.log_priors)
        for tri in self._trigrams(sentence.text):
            for side in (0, 1):
                scores[side] += self.tables[side].get(tri, self.fallback)
        return 0 if scores[0] >= scores[1] else 1

    def predicate(self, side: int):
        return lambda sentence: self.predict(sentence) == side


def load_language_labels(path) -> list[str]:
    """Per-line language labels produced by an external identifier."""
    with open(path, encoding="utf-8") as fh:
        return [line.strip() for line in fh if line.strip()]


def label_predicate(labels: list[str], wanted: str, corpus: list[TokenizedSentence]):
    """Filter predicate backed by an external label file aligned with `corpus`."""
    if len(labels) != len(corpus):
        raise ArgumentError(
            f"label count {len(labels)} does not match corpus size {len(corpus)}"
        )
    by_text = {sent.text: lab for sent, lab in zip(corpus, labels)}
    return lambda sentence: by_text.get(sentence.text) == wanted
