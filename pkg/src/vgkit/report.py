"""Matplotlib rendering for CLI report paths.

Figures land next to the delimited output; everything uses the Agg backend
so rendering works headless.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .curation import CutThresholds, SimilaritySeries, series_stats
from .gradguard import TraceBundle

_PANELS = (
    ("loss", "(a) loss"),
    ("discarded", "(b) discarded local batches"),
    ("bound", "(c) 3-sigma upper bound"),
    ("max_norm", "(d) max gradient norm"),
    ("max_norm_var", "(e) squared deviation of max norm"),
    ("post_discard_max", "(f) post-discard max norm"),
    ("ema_gn", "(g) EMA of max norm"),
    ("ema_var", "(h) EMA of variance"),
)


def render_gradguard_trace(bundle: TraceBundle, path: str) -> str:
    """Eight aligned panels of one simulated run; returns the figure path."""
    steps = np.arange(bundle.steps)
    fig, axes = plt.subplots(4, 2, figsize=(11, 12), sharex=True)
    for ax, (attr, title) in zip(axes.ravel(), _PANELS):
        series = getattr(bundle, attr)
        if attr == "discarded":
            ax.plot(steps, series, drawstyle="steps-mid", linewidth=0.9)
        else:
            ax.plot(steps, series, linewidth=0.9)
        ax.set_title(title, fontsize=10)
        ax.grid(True, alpha=0.3)
    for ax in axes[-1]:
        ax.set_xlabel("step")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def render_similarity_series(
    series: SimilaritySeries,
    cuts: list[int],
    path: str,
    th: CutThresholds | None = None,
) -> str:
    """Dissimilarity series with flagged cut indices highlighted."""
    fig, ax = plt.subplots(figsize=(10, 4))
    x = np.arange(len(series))
    ax.plot(x, series.values, linewidth=0.9, label="frame dissimilarity")
    if cuts:
        ax.scatter(cuts, series.values[cuts], color="crimson", zorder=3, label="detected cuts")
    if th is not None and len(series) >= 2:
        mu, sigma = series_stats(series)
        ax.axhline(mu + th.z_threshold * sigma, color="gray", linestyle="--", linewidth=0.8,
                   label=f"mu + {th.z_threshold}*sigma")
    ax.set_xlabel("series index")
    ax.set_ylabel("dissimilarity")
    ax.grid(True, alpha=0.3)
    ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
