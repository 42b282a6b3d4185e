"""Matplotlib rendering for the CLI report path.

Each helper writes one PNG next to the delimited report output and
returns the path. All rendering uses the Agg backend so it works
headless.
"""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence, TYPE_CHECKING

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

if TYPE_CHECKING:
    from .analysis import LengthBins
    from .suitability import SuitabilityReport

_FIGSIZE = (7.0, 4.0)


def save_ptr_chart(ptr_map: Mapping[str, float], path: str | Path) -> Path:
    """Bar chart of performance-to-time ratios, one bar per model."""
    path = Path(path)
    models = list(ptr_map)
    values = [ptr_map[m] for m in models]
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    ax.bar(range(len(models)), values, color="#4878cf")
    ax.set_xticks(range(len(models)))
    ax.set_xticklabels(models, rotation=30, ha="right")
    ax.set_ylabel("performance-to-time ratio")
    ax.axhline(1.0, color="grey", linewidth=0.8, linestyle="--")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_suitability_chart(report: "SuitabilityReport", path: str | Path) -> Path:
    """Grouped bars of normalized similarities with the threshold line."""
    path = Path(path)
    languages = [row.language for row in report.rows]
    sem = [row.sim_sem_norm for row in report.rows]
    text = [row.sim_text_norm for row in report.rows]
    score = [row.suitability for row in report.rows]
    x = range(len(languages))
    width = 0.28
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    ax.bar([i - width for i in x], sem, width, label="semantic (norm)", color="#4878cf")
    ax.bar(x, text, width, label="textual (norm)", color="#ee854a")
    ax.bar([i + width for i in x], score, width, label="suitability", color="#6acc64")
    ax.axhline(report.theta, color="red", linewidth=1.0, linestyle="--",
               label=f"theta = {report.theta:g}")
    ax.set_xticks(list(x))
    ax.set_xticklabels(languages)
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("score")
    ax.set_title(f"candidates for target '{report.target}'")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_length_histogram(
    lengths: Sequence[int], bins: "LengthBins", path: str | Path
) -> Path:
    """Token-length histogram with the three quartile boundaries marked."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    ax.hist(lengths, bins=min(50, max(10, len(set(lengths)))), color="#4878cf")
    for label, q in zip(("q1", "q2", "q3"), bins.boundaries):
        ax.axvline(q, color="red", linewidth=0.9, linestyle="--")
        ax.text(q, ax.get_ylim()[1] * 0.95, f" {label}={q:g}", fontsize=8, color="red")
    ax.set_xlabel("code length (normalized tokens)")
    ax.set_ylabel("documents")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
