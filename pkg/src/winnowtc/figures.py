"""Matplotlib rendering for report outputs.

Every report-producing command can drop PNG figures next to its delimited
output: precision-recall curves, break-even bar charts, and per-epoch
training mistake curves. All rendering uses the Agg backend so it works
headless.
"""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .evaluation import PRPoint

__all__ = ["render_bep_bars", "render_pr_curves", "render_training_curves"]


def render_pr_curves(
    curves: Mapping[str, Sequence[PRPoint]], path: str | Path, title: str = "Precision vs recall"
) -> None:
    """One precision-recall polyline per category/variant."""
    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    for name in sorted(curves):
        pts = curves[name]
        ax.plot([p.recall for p in pts], [p.precision for p in pts], label=name, lw=1.4)
    ax.plot([0, 1], [0, 1], ls=":", c="gray", lw=0.8)
    ax.set_xlabel("recall")
    ax.set_ylabel("precision")
    ax.set_xlim(-0.02, 1.02)
    ax.set_ylim(-0.02, 1.02)
    ax.set_title(title)
    ax.legend(fontsize=8, loc="lower left")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_bep_bars(
    beps: Mapping[str, float], path: str | Path, title: str = "Break-even points"
) -> None:
    """Bar chart of break-even points, one bar per category/variant."""
    names = sorted(beps)
    values = [beps[n] for n in names]
    fig, ax = plt.subplots(figsize=(max(4.0, 0.9 * len(names) + 2.0), 4.0))
    bars = ax.bar(names, values, color="#4878a8")
    for bar, value in zip(bars, values):
        ax.text(
            bar.get_x() + bar.get_width() / 2,
            value + 0.01,
            f"{value:.3f}",
            ha="center",
            fontsize=8,
        )
    ax.set_ylim(0.0, 1.08)
    ax.set_ylabel("break-even point")
    ax.set_title(title)
    ax.tick_params(axis="x", rotation=30)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_training_curves(
    mistakes: Mapping[str, Sequence[int]], path: str | Path, title: str = "Training mistakes"
) -> None:
    """Mistakes per epoch, one line per category."""
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    for name in sorted(mistakes):
        series = mistakes[name]
        ax.plot(range(1, len(series) + 1), series, label=name, lw=1.2, marker="o", ms=2.5)
    ax.set_xlabel("epoch")
    ax.set_ylabel("mistakes")
    ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
