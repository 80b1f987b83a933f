"""Figures for benchmark sweeps and convergence traces."""
from __future__ import annotations

from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def _style(ax, xlabel, ylabel):
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.3)


def plot_bench(rows, path: str | Path) -> Path:
    """Time (and BR/UE when present) against superpixel count, one line per
    (method, alpha)."""
    series = defaultdict(list)
    for r in rows:
        series[(r.method, r.alpha)].append(r)
    has_gt = any(r.br is not None for r in rows)
    panels = [("seconds", "time (s)")]
    if has_gt:
        panels += [("br", "boundary recall"), ("ue", "undersegmentation error")]

    fig, axes = plt.subplots(1, len(panels), figsize=(4.2 * len(panels), 3.4), squeeze=False)
    for ax, (attr, ylabel) in zip(axes[0], panels):
        for (method, alpha), pts in sorted(series.items()):
            by_k = defaultdict(list)
            for r in pts:
                if getattr(r, attr) is not None:
                    by_k[r.k].append(getattr(r, attr))
            ks = sorted(by_k)
            ys = [sum(by_k[k]) / len(by_k[k]) for k in ks]
            ax.plot(ks, ys, marker="o", ms=3, label=f"{method} a={alpha:g}")
        _style(ax, "superpixels", ylabel)
    axes[0][0].legend(fontsize=7, frameon=False)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_functional(functional, path: str | Path, title: str = "") -> Path:
    fig, ax = plt.subplots(figsize=(4.2, 3.2))
    ax.plot(range(1, len(functional) + 1), functional, marker="o", ms=3)
    _style(ax, "iteration", "sum of path costs")
    if title:
        ax.set_title(title, fontsize=9)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
