"""Report figures rendered next to the delimited outputs."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def plot_iteration_reports(reports, path) -> None:
    """Per-iteration mined-score / P@1 / Pearson curves."""
    its = [r.iteration for r in reports]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(its, [r.mean_mined_score for r in reports], "o-",
            label="mean mined score")
    if any(r.p_at_1 is not None for r in reports):
        ax.plot(its, [r.p_at_1 for r in reports], "s-", label="P@1")
    if any(r.pearson_r is not None for r in reports):
        ax.plot(its, [r.pearson_r for r in reports], "^-", label="Pearson r")
    ax.set_xlabel("iteration")
    ax.set_ylabel("value")
    ax.set_xticks(its)
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_score_scatter(metric_scores, human_scores, r: float, path) -> None:
    """Metric vs human scores with the fitted regression line."""
    m = np.asarray(metric_scores, dtype=np.float64)
    h = np.asarray(human_scores, dtype=np.float64)
    fig, ax = plt.subplots(figsize=(5, 5))
    ax.scatter(m, h, s=12, alpha=0.6)
    if m.std() > 0:
        slope, intercept = np.polyfit(m, h, 1)
        xs = np.linspace(m.min(), m.max(), 50)
        ax.plot(xs, slope * xs + intercept, "r-", lw=1)
    ax.set_xlabel("metric score")
    ax.set_ylabel("human score")
    ax.set_title(f"Pearson r = {r:.4f}")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
