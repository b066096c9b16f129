"""Iterative self-learning loops.

Word track: mine with the transport metric, align words from transport
plans, fit a remapping, apply it, re-mine. Sentence track: mine with the
ratio margin, train the contrastive projection, re-mine. Each loop emits
a baseline report plus one report per iteration and never mutates its
input stores.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .corpusio import (EmbeddingStore, TokenizedSentence,
                       save_embedding_store_binary)
from .errors import ArgumentError
from .evaluation import precision_at_n, retrieval_ranks
from .mining import (FilterConfig, MiningConfig, dedup_pairs, mine_margin,
                     mine_wmd, select_top_rate)
from .remap import (DEFAULT_MIN_FLOW, apply_remap, extract_word_pairs,
                    fit_clp, fit_umd)
from .sentembed import (ContrastiveConfig, SentenceProjection, pool_sentence,
                        sentence_embedding, train_projection)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class DevEval:
    """Index-aligned dev pools for P@1, plus an optional correlation probe."""

    src_sentences: tuple[TokenizedSentence, ...]
    tgt_sentences: tuple[TokenizedSentence, ...]
    pearson_fn: object = None  # callable(state) -> float, state is loop-specific

    def __post_init__(self):
        if len(self.src_sentences) != len(self.tgt_sentences):
            raise ArgumentError("dev pools must be index-aligned")


@dataclass(frozen=True)
class LoopConfig:
    track: str = "remap"  # "remap" | "contrastive"
    iterations: int = 1
    remap_kind: str = "clp"  # "clp" | "umd"
    mining: MiningConfig = field(default_factory=MiningConfig)
    filter: FilterConfig = field(default_factory=FilterConfig)
    contrastive: ContrastiveConfig = field(default_factory=ContrastiveConfig)
    min_flow: float = DEFAULT_MIN_FLOW
    workers: int = 1
    dev: DevEval | None = None

    def __post_init__(self):
        if self.track not in ("remap", "contrastive"):
            raise ArgumentError(f"unknown track {self.track!r}")
        if self.iterations < 0:
            raise ArgumentError("iterations must be >= 0")
        if self.remap_kind not in ("clp", "umd"):
            raise ArgumentError(f"unknown remap kind {self.remap_kind!r}")


@dataclass(frozen=True)
class IterationReport:
    iteration: int
    mined_pairs: int
    mean_mined_score: float
    p_at_1: float | None = None
    pearson_r: float | None = None

    def __post_init__(self):
        if self.mined_pairs < 0:
            raise ArgumentError("negative mined-pair count")
        if self.p_at_1 is not None and not (0.0 <= self.p_at_1 <= 1.0):
            raise ArgumentError("p_at_1 must lie in [0, 1]")


def reports_to_tsv(reports: list[IterationReport], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("iteration\tmined_pairs\tmean_mined_score\tp_at_1\tpearson_r\n")
        for r in reports:
            p1 = "" if r.p_at_1 is None else repr(r.p_at_1)
            pr = "" if r.pearson_r is None else repr(r.pearson_r)
            fh.write(f"{r.iteration}\t{r.mined_pairs}\t{r.mean_mined_score!r}\t{p1}\t{pr}\n")


def _dev_p1_stores(dev: DevEval, src_store: EmbeddingStore,
                   tgt_store: EmbeddingStore,
                   projection: SentenceProjection | None = None) -> float:
    src_embs = np.stack([
        sentence_embedding(src_store, s, projection=projection)
        for s in dev.src_sentences
    ])
    tgt_embs = np.stack([
        sentence_embedding(tgt_store, t, projection=projection)
        for t in dev.tgt_sentences
    ])
    ranks = retrieval_ranks(src_embs, tgt_embs, metric="cosine")
    gold = {i: i for i in range(len(dev.src_sentences))}
    return precision_at_n(ranks, gold, 1)


def _report(iteration: int, pairs, dev: DevEval | None, src_store, tgt_store,
            projection=None, state=None) -> IterationReport:
    p1 = pearson_r = None
    if dev is not None:
        p1 = _dev_p1_stores(dev, src_store, tgt_store, projection)
        if dev.pearson_fn is not None:
            pearson_r = dev.pearson_fn(state)
    mean_score = float(np.mean([p.score for p in pairs])) if pairs else 0.0
    return IterationReport(iteration=iteration, mined_pairs=len(pairs),
                           mean_mined_score=mean_score, p_at_1=p1,
                           pearson_r=pearson_r)


def run_remap_loop(src_pool: list[TokenizedSentence],
                   tgt_pool: list[TokenizedSentence],
                   src_store: EmbeddingStore, tgt_store: EmbeddingStore,
                   config: LoopConfig, run_dir=None):
    """Mine, align, fit, and apply a remapping per iteration.

    Orthogonal maps go to the source store; bias removal to both stores.
    Maps compose across iterations because mining always uses the latest
    stores. Returns ((src_store, tgt_store), reports).
    """
    reports = [
        _report(0, [], config.dev, src_store, tgt_store,
                state=(src_store, tgt_store))
    ]
    for it in range(1, config.iterations + 1):
        mined = mine_wmd(src_pool, tgt_pool, src_store, tgt_store,
                         config.mining, workers=config.workers)
        selected = select_top_rate(mined, config.mining.extraction_rate)
        word_pairs = extract_word_pairs(selected, src_store, tgt_store,
                                        config.min_flow)
        if len(word_pairs) == 0:
            log.warning("iteration %d mined zero word pairs; aborting loop", it)
            break
        if config.remap_kind == "clp":
            pmap = fit_clp(word_pairs)
            src_store = apply_remap(src_store, pmap)
        else:
            pmap = fit_umd(word_pairs)
            src_store = apply_remap(src_store, pmap)
            tgt_store = apply_remap(tgt_store, pmap)
        if run_dir is not None:
            save_embedding_store_binary(src_store, run_dir / f"src_store.iter{it}.useb")
            save_embedding_store_binary(tgt_store, run_dir / f"tgt_store.iter{it}.useb")
        reports.append(
            _report(it, selected, config.dev, src_store, tgt_store,
                    state=(src_store, tgt_store))
        )
    if run_dir is not None:
        reports_to_tsv(reports, run_dir / "reports.tsv")
    return (src_store, tgt_store), reports


def run_contrastive_loop(src_pool: list[TokenizedSentence],
                         tgt_pool: list[TokenizedSentence],
                         src_store: EmbeddingStore, tgt_store: EmbeddingStore,
                         config: LoopConfig, run_dir=None):
    """Mine with the ratio margin, then refine the sentence projection.

    Pools must be pre-filtered and deduplicated. Returns (projection, reports).
    """
    src_pooled = np.stack([
        pool_sentence(src_store.token_matrix(s)) for s in src_pool
    ])
    tgt_pooled = np.stack([
        pool_sentence(tgt_store.token_matrix(t)) for t in tgt_pool
    ])
    projection = SentenceProjection.identity(src_store.dimension)
    reports = [
        _report(0, [], config.dev, src_store, tgt_store,
                projection=projection, state=projection)
    ]
    mining = config.mining
    for it in range(1, config.iterations + 1):
        src_proj = projection.apply(src_pooled)
        tgt_proj = projection.apply(tgt_pooled)
        mined = mine_margin(src_pool, tgt_pool, src_proj, tgt_proj, mining)
        selected = dedup_pairs(select_top_rate(mined, mining.extraction_rate))
        if len(selected) < config.contrastive.batch_size:
            if len(selected) < 2:
                log.warning("iteration %d: too few pairs; aborting loop", it)
                break
            # shrink the batch rather than aborting on small synthetic pools
            cfg = replace(config.contrastive, batch_size=max(2, len(selected)))
        else:
            cfg = config.contrastive
        cfg = replace(cfg, seed=cfg.seed + it)  # fresh shuffle per iteration
        projection = train_projection(selected, src_store, tgt_store, cfg,
                                      initial=projection)
        if run_dir is not None:
            save_embedding_store_binary(projection.to_store(),
                                        run_dir / f"projection.iter{it}.useb")
        reports.append(
            _report(it, selected, config.dev, src_store, tgt_store,
                    projection=projection, state=projection)
        )
    if run_dir is not None:
        reports_to_tsv(reports, run_dir / "reports.tsv")
        projection.log_to_tsv(run_dir / "training_log.tsv")
    return projection, reports
