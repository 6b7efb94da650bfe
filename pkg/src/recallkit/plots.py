"""Figure rendering for curve and experiment outputs.

Uses the non-interactive backend so figures render to files in headless
runs; every plotting command writes a PNG next to its CSV.
"""
from __future__ import annotations

from pathlib import Path
from typing import Iterable, Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .ranking import CurvePoint
from .simulator import ExperimentRow

_METRIC_STYLES = (("recall", "-"), ("precision", "--"), ("f1", ":"))


def plot_curves(points: Iterable[CurvePoint], path: str | Path, title: str = "") -> None:
    """Recall/precision/F1 against document cut-off, one line set per series."""
    series: dict[tuple[str, str, str], list[CurvePoint]] = {}
    for point in points:
        key = (point.backend, point.rank_mode, point.query_policy)
        series.setdefault(key, []).append(point)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    colors = plt.rcParams["axes.prop_cycle"].by_key()["color"]
    for i, (key, group) in enumerate(sorted(series.items())):
        group = sorted(group, key=lambda p: p.k)
        ks = [p.k for p in group]
        label_base = "/".join(part for part in key if part)
        color = colors[i % len(colors)]
        for metric, style in _METRIC_STYLES:
            values = [getattr(p, metric) for p in group]
            label = f"{label_base} {metric}" if label_base else metric
            ax.plot(ks, values, style, color=color, label=label)
    ax.set_xlabel("documents retrieved (k)")
    ax.set_ylabel("macro-averaged metric")
    ax.set_ylim(0, 1.05)
    if title:
        ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_experiment(rows: Sequence[ExperimentRow], path: str | Path, title: str = "") -> None:
    """Mean iterations to target recall per strategy, with std whiskers."""
    labels = []
    for row in rows:
        label = row.strategy
        if row.cumulative:
            label += "+cum"
        if row.amplify:
            label += "+amp"
        labels.append(label)
    means = [row.mean_iterations for row in rows]
    stds = [row.std_iterations for row in rows]
    fig, ax = plt.subplots(figsize=(max(5, 1.2 * len(rows)), 4))
    positions = range(len(rows))
    ax.bar(positions, means, yerr=stds, capsize=4, color="tab:blue", alpha=0.85)
    ax.set_xticks(list(positions))
    ax.set_xticklabels(labels, rotation=20, ha="right", fontsize=8)
    ax.set_ylabel("mean iterations to target recall")
    if title:
        ax.set_title(title)
    ax.grid(True, axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_traces(traces: Mapping[str, Sequence[Sequence[float]]], path: str | Path, title: str = "") -> None:
    """Per-iteration recall traces; one color per strategy, thin line per session."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    colors = plt.rcParams["axes.prop_cycle"].by_key()["color"]
    for i, (label, sessions) in enumerate(sorted(traces.items())):
        color = colors[i % len(colors)]
        for j, trace in enumerate(sessions):
            ax.plot(
                range(1, len(trace) + 1),
                trace,
                color=color,
                alpha=0.5,
                linewidth=1,
                label=label if j == 0 else None,
            )
    ax.set_xlabel("iteration")
    ax.set_ylabel("recall")
    ax.set_ylim(0, 1.05)
    if title:
        ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
