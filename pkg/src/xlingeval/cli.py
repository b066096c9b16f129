"""Command-line interface.

Subcommands: score, mine, filter, remap, train-sent, train-lm, selflearn,
eval, compare. A key=value config file can seed any flag; explicit flags
win. Every run writes a manifest with input/output hashes. Exit codes:
0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click
import numpy as np

from . import corpusio, langmodel, manifest, mining, remap, scorer, selflearn
from .errors import ToolkitError
from .evaluation import compare_metrics, pearson, report_tsv
from .sentembed import ContrastiveConfig, SentenceProjection, pool_sentence
from .mining import FilterConfig, MiningConfig


def _read_config(path: str | None) -> dict:
    """key=value lines; '#' starts a comment."""
    if path is None:
        return {}
    values = {}
    for lineno, line in enumerate(open(path, encoding="utf-8"), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise click.UsageError(f"{path}: line {lineno} is not key=value")
        key, val = (part.strip() for part in line.split("=", 1))
        values[key.replace("-", "_")] = val
    return values


def _write_manifest(out: Path, argv, config: dict, inputs, outputs, seed=None):
    manifest.write_manifest(Path(str(out) + ".manifest.json"), argv, config,
                            [p for p in inputs if p is not None], outputs, seed)


def _load_scores_tsv(path) -> list[float]:
    scores = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("#") or not line.strip():
                continue
            cols = line.rstrip("\n").split("\t")
            scores.append(float(cols[-1]))
    return scores


def _sentence_embeddings(store, pool):
    if store.kind == "sentence":
        return np.stack([store.vector(i) for i in range(len(pool))])
    return np.stack([
        pool_sentence(store.token_matrix(
            s, i if store.kind == "contextual-token" else None))
        for i, s in enumerate(pool)
    ])


@click.group()
def cli():
    """Unsupervised cross-lingual MT evaluation toolkit."""


@cli.command()
@click.option("--preset", default="tuned", show_default=True,
              type=click.Choice(sorted(scorer.PRESETS)))
@click.option("--src", required=True, type=click.Path(exists=True))
@click.option("--hyp", required=True, type=click.Path(exists=True))
@click.option("--src-emb", required=True, type=click.Path(exists=True))
@click.option("--hyp-emb", required=True, type=click.Path(exists=True))
@click.option("--mono-emb", type=click.Path(exists=True),
              help="Store for the hypothesis/pseudo-reference comparison "
                   "(defaults to --hyp-emb).")
@click.option("--pseudo-ref", type=click.Path(exists=True))
@click.option("--lm-model", type=click.Path(exists=True))
@click.option("--lm-scores", type=click.Path(exists=True),
              help="External per-hypothesis fluency scores (index TSV).")
@click.option("--projection", type=click.Path(exists=True),
              help="Sentence projection; enables the ensemble output.")
@click.option("--w-pseudo", type=float, help="Override the preset weight.")
@click.option("--w-lm", type=float, help="Override the preset weight.")
@click.option("--w-xlng", type=float, help="Override the preset weight.")
@click.option("--no-normalize", is_flag=True,
              help="Disable per-batch component normalization in the ensemble.")
@click.option("--out", required=True, type=click.Path())
def score(preset, src, hyp, src_emb, hyp_emb, mono_emb, pseudo_ref, lm_model,
          lm_scores, projection, w_pseudo, w_lm, w_xlng, no_normalize, out):
    """Score hypothesis sentences against their sources."""
    weights = scorer.preset(preset)
    overrides = {}
    if w_pseudo is not None:
        overrides["w_pseudo"] = w_pseudo
    if w_lm is not None:
        overrides["w_lm"] = w_lm
    if w_xlng is not None:
        overrides["w_xlng"] = w_xlng
    if no_normalize:
        overrides["normalize_components"] = False
    if overrides:
        from dataclasses import replace
        weights = replace(weights, **overrides)

    sources = corpusio.load_corpus(src)
    hyps = corpusio.load_corpus(hyp)
    if len(sources) != len(hyps):
        raise ToolkitError(
            f"source count {len(sources)} != hypothesis count {len(hyps)}"
        )
    src_store = corpusio.load_embedding_store(src_emb)
    hyp_store = corpusio.load_embedding_store(hyp_emb)
    mono_store = corpusio.load_embedding_store(mono_emb) if mono_emb else None
    refs = corpusio.load_corpus(pseudo_ref) if pseudo_ref else None
    if refs is not None and len(refs) != len(sources):
        raise ToolkitError("pseudo-reference count does not match source count")
    if weights.w_pseudo != 0.0 and refs is None:
        raise ToolkitError("preset needs pseudo references; pass --pseudo-ref "
                           "or set --w-pseudo 0")
    lm = langmodel.load_ngram_model(lm_model) if lm_model else None
    external_lm = langmodel.load_external_scores(lm_scores) if lm_scores else None
    if weights.w_lm != 0.0 and lm is None and external_lm is None:
        raise ToolkitError("preset needs a fluency term; pass --lm-model or "
                           "--lm-scores, or set --w-lm 0")
    proj = None
    if projection:
        proj = SentenceProjection.from_store(
            corpusio.load_embedding_store(projection))

    wrd_scores = []
    snt_scores = []
    for i, (x, y) in enumerate(zip(sources, hyps)):
        xi = i if src_store.kind == "contextual-token" else None
        yi = i if hyp_store.kind == "contextual-token" else None
        wrd_scores.append(scorer.score_wrd(
            x, y, src_store, hyp_store, lm, weights,
            pseudo_ref=refs[i] if refs else None,
            mono_store=mono_store,
            lm_value=external_lm[i] if external_lm else None,
            x_index=xi, y_index=yi))
        if proj is not None:
            snt_scores.append(scorer.score_snt(
                x, y, src_store, hyp_store, proj, x_index=xi, y_index=yi))

    if proj is not None:
        final = scorer.score_ensemble(wrd_scores, snt_scores, weights)
        kind = "ensemble"
    else:
        final = np.asarray(wrd_scores)
        kind = "wrd"
    with open(out, "w", encoding="utf-8") as fh:
        fh.write(f"# preset={preset} kind={kind} w_xlng={weights.w_xlng} "
                 f"w_lm={weights.w_lm} w_pseudo={weights.w_pseudo} "
                 f"w_wrd={weights.w_wrd} w_snt={weights.w_snt}\n")
        for i, s in enumerate(final):
            fh.write(f"{i}\t{float(s)!r}\n")
    _write_manifest(Path(out), sys.argv,
                    {"preset": preset, **overrides},
                    [src, hyp, src_emb, hyp_emb, mono_emb, pseudo_ref,
                     lm_model, lm_scores, projection], [out])
    click.echo(f"wrote {len(final)} scores to {out}")


@cli.command()
@click.option("--strategy", default="wmd-prefetch", show_default=True,
              type=click.Choice(["wmd-prefetch", "ratio-margin"]))
@click.option("--src", required=True, type=click.Path(exists=True))
@click.option("--tgt", required=True, type=click.Path(exists=True))
@click.option("--src-emb", required=True, type=click.Path(exists=True))
@click.option("--tgt-emb", required=True, type=click.Path(exists=True))
@click.option("--k", default=20, show_default=True,
              help="Prefetch size (wmd-prefetch) or neighborhood size "
                   "(ratio-margin).")
@click.option("--rate", default=0.05, show_default=True)
@click.option("--dedup", is_flag=True)
@click.option("--workers", default=1, show_default=True)
@click.option("--out", required=True, type=click.Path())
def mine(strategy, src, tgt, src_emb, tgt_emb, k, rate, dedup, workers, out):
    """Mine pseudo-parallel sentence pairs from two monolingual pools."""
    src_pool = corpusio.load_corpus(src)
    tgt_pool = corpusio.load_corpus(tgt)
    src_store = corpusio.load_embedding_store(src_emb)
    tgt_store = corpusio.load_embedding_store(tgt_emb)
    config = MiningConfig(strategy=strategy, k_prefetch=k, k_margin=k,
                          extraction_rate=rate, dedup=dedup)
    if strategy == "wmd-prefetch":
        pairs = mining.mine_wmd(src_pool, tgt_pool, src_store, tgt_store,
                                config, workers=workers)
        if dedup:
            pairs = mining.dedup_pairs(pairs)
    else:
        src_embs = _sentence_embeddings(src_store, src_pool)
        tgt_embs = _sentence_embeddings(tgt_store, tgt_pool)
        pairs = mining.mine_margin(src_pool, tgt_pool, src_embs, tgt_embs, config)
    pairs = mining.select_top_rate(pairs, rate)
    corpusio.save_scored_pairs(pairs, out)
    _write_manifest(Path(out), sys.argv, {"strategy": strategy, "k": k,
                                          "rate": rate},
                    [src, tgt, src_emb, tgt_emb], [out])
    click.echo(f"mined {len(pairs)} pairs to {out}")


@cli.command("filter")
@click.option("--corpus", "corpus_path", type=click.Path(exists=True))
@click.option("--pairs", "pairs_path", type=click.Path(exists=True))
@click.option("--min-tokens", default=3, show_default=True)
@click.option("--max-tokens", default=30, show_default=True)
@click.option("--max-overlap", default=0.5, show_default=True)
@click.option("--report", "report_path", type=click.Path())
@click.option("--out", required=True, type=click.Path())
def filter_cmd(corpus_path, pairs_path, min_tokens, max_tokens, max_overlap,
               report_path, out):
    """Apply the length/overlap filter chain to a corpus or mined pairs."""
    if (corpus_path is None) == (pairs_path is None):
        raise click.UsageError("pass exactly one of --corpus / --pairs")
    config = FilterConfig(min_tokens=min_tokens, max_tokens=max_tokens,
                          max_overlap=max_overlap)
    if corpus_path:
        items = corpusio.load_corpus(corpus_path)
    else:
        items = corpusio.load_scored_pairs(pairs_path)
    kept, report = mining.filter_corpus(items, config)
    if corpus_path:
        corpusio.save_corpus(kept, out)
    else:
        corpusio.save_scored_pairs(kept, out)
    lines = report.lines()
    if report_path:
        Path(report_path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    else:
        for line in lines:
            click.echo(line, err=True)
    _write_manifest(Path(out), sys.argv, {"min_tokens": min_tokens,
                                          "max_tokens": max_tokens,
                                          "max_overlap": max_overlap},
                    [corpus_path or pairs_path],
                    [out] + ([report_path] if report_path else []))
    click.echo(f"kept {report.kept}/{report.input_count} to {out}")


@cli.command("remap")
@click.option("--pairs", "pairs_path", required=True, type=click.Path(exists=True))
@click.option("--src-emb", required=True, type=click.Path(exists=True))
@click.option("--tgt-emb", required=True, type=click.Path(exists=True))
@click.option("--kind", default="clp", show_default=True,
              type=click.Choice(["clp", "umd"]))
@click.option("--min-flow", default=remap.DEFAULT_MIN_FLOW, show_default=True)
@click.option("--out-map", required=True, type=click.Path())
@click.option("--out-src-emb", type=click.Path(),
              help="Also write the remapped source store.")
@click.option("--out-tgt-emb", type=click.Path(),
              help="Also write the remapped target store (umd only).")
def remap_cmd(pairs_path, src_emb, tgt_emb, kind, min_flow, out_map,
              out_src_emb, out_tgt_emb):
    """Fit a remapping from mined pairs and optionally apply it."""
    pairs = corpusio.load_scored_pairs(pairs_path)
    src_store = corpusio.load_embedding_store(src_emb)
    tgt_store = corpusio.load_embedding_store(tgt_emb)
    word_pairs = remap.extract_word_pairs(pairs, src_store, tgt_store, min_flow)
    if len(word_pairs) == 0:
        raise ToolkitError("no word pairs extracted; lower --min-flow?")
    pmap = remap.fit_clp(word_pairs) if kind == "clp" else remap.fit_umd(word_pairs)
    corpusio.save_embedding_store_binary(pmap.to_store(), out_map)
    outputs = [out_map]
    if out_src_emb:
        corpusio.save_embedding_store_binary(remap.apply_remap(src_store, pmap),
                                             out_src_emb)
        outputs.append(out_src_emb)
    if out_tgt_emb:
        if pmap.kind != "bias-removal":
            raise ToolkitError("orthogonal maps apply to the source side only")
        corpusio.save_embedding_store_binary(remap.apply_remap(tgt_store, pmap),
                                             out_tgt_emb)
        outputs.append(out_tgt_emb)
    _write_manifest(Path(out_map), sys.argv, {"kind": kind, "min_flow": min_flow},
                    [pairs_path, src_emb, tgt_emb], outputs)
    click.echo(f"fitted {kind} map from {len(word_pairs)} word pairs")


@cli.command("train-sent")
@click.option("--pairs", "pairs_path", required=True, type=click.Path(exists=True))
@click.option("--src-emb", required=True, type=click.Path(exists=True))
@click.option("--tgt-emb", required=True, type=click.Path(exists=True))
@click.option("--temperature", default=0.05, show_default=True)
@click.option("--batch-size", default=256, show_default=True)
@click.option("--learning-rate", default=5e-5, show_default=True)
@click.option("--epochs", default=1, show_default=True)
@click.option("--denominator-mode", default="exclude-positive", show_default=True,
              type=click.Choice(["exclude-positive", "include-positive"]))
@click.option("--seed", required=True, type=int)
@click.option("--out", required=True, type=click.Path())
@click.option("--log-out", type=click.Path())
def train_sent(pairs_path, src_emb, tgt_emb, temperature, batch_size,
               learning_rate, epochs, denominator_mode, seed, out, log_out):
    """Train the contrastive sentence projection on mined pairs."""
    from .sentembed import train_projection
    pairs = corpusio.load_scored_pairs(pairs_path)
    src_store = corpusio.load_embedding_store(src_emb)
    tgt_store = corpusio.load_embedding_store(tgt_emb)
    config = ContrastiveConfig(temperature=temperature, batch_size=batch_size,
                               learning_rate=learning_rate,
                               epochs_per_iteration=epochs,
                               denominator_mode=denominator_mode, seed=seed)
    projection = train_projection(pairs, src_store, tgt_store, config)
    corpusio.save_embedding_store_binary(projection.to_store(), out)
    outputs = [out]
    if log_out:
        projection.log_to_tsv(log_out)
        outputs.append(log_out)
    _write_manifest(Path(out), sys.argv, {"temperature": temperature,
                                          "batch_size": batch_size,
                                          "learning_rate": learning_rate},
                    [pairs_path, src_emb, tgt_emb], outputs, seed=seed)
    click.echo(f"trained projection on {len(pairs)} pairs")


@cli.command("train-lm")
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--order", default=3, show_default=True)
@click.option("--smoothing", default="witten-bell", show_default=True,
              type=click.Choice(["witten-bell", "add-k"]))
@click.option("--k", default=1.0, show_default=True)
@click.option("--out", required=True, type=click.Path())
def train_lm(corpus_path, order, smoothing, k, out):
    """Train the n-gram fluency model on target-language text."""
    corpus = corpusio.load_corpus(corpus_path)
    model = langmodel.train_ngram(corpus, order=order, smoothing=smoothing, k=k)
    langmodel.save_ngram_model(model, out)
    _write_manifest(Path(out), sys.argv, {"order": order, "smoothing": smoothing,
                                          "k": k}, [corpus_path], [out])
    click.echo(f"trained order-{order} model on {len(corpus)} sentences")


@cli.command("selflearn")
@click.option("--track", default="remap", show_default=True,
              type=click.Choice(["remap", "contrastive"]))
@click.option("--src", required=True, type=click.Path(exists=True))
@click.option("--tgt", required=True, type=click.Path(exists=True))
@click.option("--src-emb", required=True, type=click.Path(exists=True))
@click.option("--tgt-emb", required=True, type=click.Path(exists=True))
@click.option("--iterations", default=1, show_default=True)
@click.option("--remap-kind", default="clp", show_default=True,
              type=click.Choice(["clp", "umd"]))
@click.option("--k", default=20, show_default=True)
@click.option("--rate", default=0.05, show_default=True)
@click.option("--batch-size", default=256, show_default=True)
@click.option("--learning-rate", default=5e-5, show_default=True)
@click.option("--aligned-dev", is_flag=True,
              help="Pools are index-aligned; report P@1 per iteration.")
@click.option("--workers", default=1, show_default=True)
@click.option("--seed", required=True, type=int)
@click.option("--run-dir", required=True, type=click.Path())
def selflearn_cmd(track, src, tgt, src_emb, tgt_emb, iterations, remap_kind,
                  k, rate, batch_size, learning_rate, aligned_dev, workers,
                  seed, run_dir):
    """Run the iterative mine/improve loop, reporting per iteration."""
    from .plots import plot_iteration_reports
    run_dir = Path(run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    src_pool = corpusio.load_corpus(src)
    tgt_pool = corpusio.load_corpus(tgt)
    src_store = corpusio.load_embedding_store(src_emb)
    tgt_store = corpusio.load_embedding_store(tgt_emb)
    dev = None
    if aligned_dev:
        if len(src_pool) != len(tgt_pool):
            raise ToolkitError("--aligned-dev needs equal-size pools")
        dev = selflearn.DevEval(tuple(src_pool), tuple(tgt_pool))
    config = selflearn.LoopConfig(
        track=track, iterations=iterations, remap_kind=remap_kind,
        mining=MiningConfig(k_prefetch=k, k_margin=min(k, max(1, len(tgt_pool) - 1)),
                            extraction_rate=rate),
        contrastive=ContrastiveConfig(batch_size=batch_size,
                                      learning_rate=learning_rate, seed=seed),
        workers=workers, dev=dev)
    if track == "remap":
        _, reports = selflearn.run_remap_loop(src_pool, tgt_pool, src_store,
                                              tgt_store, config, run_dir=run_dir)
    else:
        _, reports = selflearn.run_contrastive_loop(src_pool, tgt_pool, src_store,
                                                    tgt_store, config,
                                                    run_dir=run_dir)
    plot_iteration_reports(reports, run_dir / "reports.png")
    outputs = sorted(p for p in run_dir.iterdir()
                     if p.is_file() and p.name != "manifest.json")
    manifest.write_manifest(run_dir / "manifest.json", sys.argv,
                            {"track": track, "iterations": iterations,
                             "remap_kind": remap_kind, "k": k, "rate": rate},
                            [src, tgt, src_emb, tgt_emb], outputs, seed=seed)
    click.echo(f"completed {len(reports) - 1} iterations; reports in {run_dir}")


@cli.command("eval")
@click.option("--scores", "scores_path", required=True, type=click.Path(exists=True))
@click.option("--dataset", required=True, type=click.Path(exists=True))
@click.option("--metric-name", default="xlingeval", show_default=True)
@click.option("--lang-pair", default="xx-yy", show_default=True)
@click.option("--out", type=click.Path())
@click.option("--figure", "figure_path", type=click.Path())
def eval_cmd(scores_path, dataset, metric_name, lang_pair, out, figure_path):
    """Correlate metric scores with human judgments."""
    from .plots import plot_score_scatter
    metric_scores = _load_scores_tsv(scores_path)
    records = corpusio.load_eval_dataset(dataset)
    if len(metric_scores) != len(records):
        raise ToolkitError(
            f"{len(metric_scores)} scores vs {len(records)} dataset rows"
        )
    human = [r.human_score for r in records]
    result = pearson(metric_scores, human)
    click.echo(f"pearson_r\t{result.r!r}")
    click.echo(f"n\t{result.n}")
    click.echo(f"fisher_ci\t[{result.fisher_ci_low!r}, {result.fisher_ci_high!r}]")
    outputs = []
    if out:
        report_tsv([(metric_name, lang_pair, result.r)], out)
        outputs.append(out)
    if figure_path:
        plot_score_scatter(metric_scores, human, result.r, figure_path)
        outputs.append(figure_path)
    if outputs:
        _write_manifest(Path(outputs[0]), sys.argv,
                        {"metric_name": metric_name, "lang_pair": lang_pair},
                        [scores_path, dataset], outputs)


@cli.command("compare")
@click.option("--scores-a", required=True, type=click.Path(exists=True))
@click.option("--scores-b", required=True, type=click.Path(exists=True))
@click.option("--dataset", required=True, type=click.Path(exists=True))
@click.option("--method", default="bootstrap", show_default=True,
              type=click.Choice(["bootstrap", "ttest"]))
@click.option("--resamples", default=10000, show_default=True)
@click.option("--seed", required=True, type=int)
def compare_cmd(scores_a, scores_b, dataset, method, resamples, seed):
    """Significance test between two metrics' correlations."""
    a = _load_scores_tsv(scores_a)
    b = _load_scores_tsv(scores_b)
    records = corpusio.load_eval_dataset(dataset)
    human = [r.human_score for r in records]
    if not (len(a) == len(b) == len(human)):
        raise ToolkitError("score/dataset lengths differ")
    p = compare_metrics(a, b, human, method=method, resamples=resamples, seed=seed)
    click.echo(f"p_value\t{p!r}")


def dispatch(argv: list[str] | None = None) -> int:
    """Run one subcommand; returns the process exit code."""
    if argv is None:
        argv = sys.argv[1:]
    try:
        default_map = {}
        if "--config" in argv:
            i = argv.index("--config")
            cfg = _read_config(argv[i + 1])
            argv = argv[:i] + argv[i + 2:]
            default_map = {cmd.replace("_", "-"): cfg for cmd in
                           ["score", "mine", "filter", "remap", "train_sent",
                            "train_lm", "selflearn", "eval", "compare"]}
        cli.main(args=argv, standalone_mode=False,
                 default_map=default_map or None)
        return 0
    except click.exceptions.Exit as exc:
        return int(exc.exit_code)
    except click.UsageError as exc:
        click.echo(f"usage error: {exc.format_message()}", err=True)
        return 1
    except (ToolkitError, OSError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 2


def main():
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
