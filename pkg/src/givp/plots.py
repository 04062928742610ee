"""Matplotlib figures for experiment tables, written as reproducible PNGs."""

from __future__ import annotations

from typing import Dict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_META = {"Software": None}


def plot_histograms(table: Dict[str, np.ndarray], result: Dict, path) -> None:
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.5))
    for ax, col, title in zip(axes, ("alpha_deg", "epsilon"), ("smallest angle (degrees)", "epsilon")):
        h = result["histograms"][col]
        edges = np.asarray(h["edges"])
        ax.bar(edges[:-1], h["counts"], width=np.diff(edges), align="edge", color="#4c72b0", edgecolor="white")
        ax.set_xlabel(title)
        ax.set_ylabel("runs")
        ax.set_title(f"mean {result['poisson_rate'][col]:.4g}")
    fig.tight_layout()
    fig.savefig(path, dpi=100, metadata=_META)
    plt.close(fig)


def plot_sites_vs_edges(table: Dict[str, np.ndarray], result: Dict, path) -> None:
    fig, ax = plt.subplots(figsize=(5, 4))
    e = table["edges"]
    xs = np.linspace(e.min(), e.max(), 2)
    for variant, color in (("sequential", "#c44e52"), ("recursive", "#55a868")):
        ax.scatter(e, table[f"sites_{variant}"], s=10, color=color, label=variant)
        fit = result["regressions"].get(variant)
        if fit:
            ax.plot(xs, fit["slope"] * xs + fit["intercept"], color=color, lw=1,
                    label=f"y = {fit['slope']:.4g}x + {fit['intercept']:.4g}")
    ax.set_xlabel("edges")
    ax.set_ylabel("sites")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=100, metadata=_META)
    plt.close(fig)
