"""Figures for the report command, drawn from the merged data tables."""

from __future__ import annotations

from collections import defaultdict
from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

STYLE = {
    "figure.figsize": (6.0, 3.6),
    "figure.dpi": 120,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "legend.frameon": False,
    "font.size": 9,
}


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def plot_change_rate_by_level(rows: Sequence[Mapping], path: str | Path) -> Path:
    """Grouped bars: belief change rate per open-mindedness level, one bar per direction/source."""
    series: dict[str, dict[int, float]] = defaultdict(dict)
    for r in rows:
        series[f"{r['source']} {r['direction']}"][int(r["level"])] = float(r["change_rate"])
    levels = sorted({lvl for s in series.values() for lvl in s})
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        width = 0.8 / max(1, len(series))
        for k, (label, values) in enumerate(sorted(series.items())):
            xs = [lvl - 0.4 + width * (k + 0.5) for lvl in levels]
            ax.bar(xs, [values.get(lvl, 0.0) for lvl in levels], width=width, label=label)
        ax.set_xticks(levels)
        ax.set_xlabel("open-mindedness level")
        ax.set_ylabel("belief change rate")
        ax.set_ylim(0, 1)
        ax.legend()
        return _save(fig, Path(path))


def plot_mean_score_by_condition(rows: Sequence[Mapping], path: str | Path) -> Path:
    series: dict[str, dict[str, float]] = defaultdict(dict)
    conditions: list[str] = []
    for r in rows:
        series[r["source"]][r["condition"]] = float(r["mean_belief_score"])
        if r["condition"] not in conditions:
            conditions.append(r["condition"])
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        width = 0.8 / max(1, len(series))
        for k, (label, values) in enumerate(sorted(series.items())):
            xs = [i - 0.4 + width * (k + 0.5) for i in range(len(conditions))]
            ax.bar(xs, [values.get(c, 0.0) for c in conditions], width=width, label=label)
        ax.set_xticks(range(len(conditions)))
        ax.set_xticklabels(conditions)
        ax.set_xlabel("persuading agent belief box")
        ax.set_ylabel("target mean belief score")
        ax.set_ylim(0, 5)
        ax.legend()
        return _save(fig, Path(path))


def plot_rate_by_group_size(rows: Sequence[Mapping], path: str | Path) -> Path:
    series: dict[str, list[tuple[int, float]]] = defaultdict(list)
    stats: dict[str, str] = {}
    for r in rows:
        label = f"{r['source']} ({r['dataset']})"
        series[label].append((int(r["group_size"]), float(r["change_rate"])))
        if r.get("pearson_r") not in (None, ""):
            stats[label] = f"r={float(r['pearson_r']):.2f}, p={float(r['p_value']):.3g}"
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for label, pts in sorted(series.items()):
            pts.sort()
            name = f"{label}: {stats[label]}" if label in stats else label
            ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=name)
        ax.set_xlabel("peer group size")
        ax.set_ylabel("belief change rate")
        ax.set_ylim(0, 1)
        ax.xaxis.get_major_locator().set_params(integer=True)
        ax.legend()
        return _save(fig, Path(path))


def plot_bfi2_scores(rows: Sequence[Mapping], path: str | Path, trait: str = "open-mindedness") -> Path:
    series: dict[str, list[tuple[int, float]]] = defaultdict(list)
    for r in rows:
        if r["trait"] == trait:
            series[r["source"]].append((int(r["level"]), float(r["score"])))
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for label, pts in sorted(series.items()):
            pts.sort()
            ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="s", label=label)
        ax.set_xlabel("open-mindedness level")
        ax.set_ylabel(f"BFI-2 {trait} score")
        ax.set_ylim(0, 100)
        ax.legend()
        return _save(fig, Path(path))
