"""Merge results.csv files into per-figure data tables (and render them)."""

from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import Iterable, Sequence

from .errors import DataError

RESULT_COLUMNS = ["experiment", "dataset", "condition", "metric", "n", "value"]


def _resolve(inputs: Iterable[str | Path]) -> list[Path]:
    paths = []
    for item in inputs:
        p = Path(item)
        if p.is_dir():
            p = p / "results.csv"
        if not p.is_file():
            raise DataError(f"results file not found: {p}")
        paths.append(p)
    return paths


def read_results(inputs: Iterable[str | Path]) -> list[dict]:
    """All rows of the given results.csv files, tagged with a ``source`` label."""
    rows = []
    for p in _resolve(inputs):
        source = p.parent.name or p.stem
        with open(p, encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames != RESULT_COLUMNS:
                raise DataError(f"{p}: unexpected columns {reader.fieldnames}")
            for r in reader:
                r["source"] = source
                rows.append(r)
    return rows


def _kv(condition: str) -> dict[str, str]:
    return dict(part.split("=", 1) for part in condition.split(",") if "=" in part)


def change_rate_by_level(rows: Sequence[dict]) -> list[dict]:
    out = []
    for r in rows:
        if r["experiment"] == "open-mindedness" and r["metric"] == "change_rate":
            kv = _kv(r["condition"])
            out.append(
                {"source": r["source"], "level": int(kv["level"]), "direction": kv["direction"],
                 "n": int(r["n"]), "change_rate": float(r["value"])}
            )
    return out


def mean_score_by_condition(rows: Sequence[dict]) -> list[dict]:
    return [
        {"source": r["source"], "condition": r["condition"], "n": int(r["n"]),
         "mean_belief_score": float(r["value"])}
        for r in rows
        if r["experiment"] == "persuasion" and r["metric"] == "mean_belief_score"
    ]


def rate_by_group_size(rows: Sequence[dict]) -> list[dict]:
    pooled: dict[tuple[str, str], dict[str, float]] = {}
    for r in rows:
        if r["experiment"] == "peer-pressure" and r["condition"] == "pooled":
            pooled.setdefault((r["source"], r["dataset"]), {})[r["metric"]] = float(r["value"])
    out = []
    for r in rows:
        if r["experiment"] == "peer-pressure" and r["metric"] == "change_rate":
            st = pooled.get((r["source"], r["dataset"]), {})
            out.append(
                {"source": r["source"], "dataset": r["dataset"],
                 "group_size": int(_kv(r["condition"])["group_size"]),
                 "n": int(r["n"]), "change_rate": float(r["value"]),
                 "pearson_r": st.get("pearson_r", ""), "f_statistic": st.get("f_statistic", ""),
                 "p_value": st.get("p_value", "")}
            )
    return out


def bfi2_scores(rows: Sequence[dict]) -> list[dict]:
    out = []
    for r in rows:
        if r["experiment"] == "bfi2" and r["metric"].startswith("score:"):
            out.append(
                {"source": r["source"], "level": int(_kv(r["condition"])["level"]),
                 "trait": r["metric"][len("score:"):], "n": int(r["n"]), "score": float(r["value"])}
            )
    return out


TABLES = {
    "change_rate_by_level": change_rate_by_level,
    "mean_score_by_condition": mean_score_by_condition,
    "rate_by_group_size": rate_by_group_size,
    "bfi2_scores": bfi2_scores,
}


def to_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO(newline="")
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
    return buf.getvalue()


def build_report(inputs: Iterable[str | Path], out_dir: str | Path, figures: bool = True) -> list[Path]:
    """Write one CSV (and one PNG when ``figures``) per non-empty table."""
    rows = read_results(inputs)
    if not rows:
        raise DataError("no result rows found in the given inputs")
    from . import plotting

    plotters = {
        "change_rate_by_level": plotting.plot_change_rate_by_level,
        "mean_score_by_condition": plotting.plot_mean_score_by_condition,
        "rate_by_group_size": plotting.plot_rate_by_group_size,
        "bfi2_scores": plotting.plot_bfi2_scores,
    }
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, build in TABLES.items():
        table = build(rows)
        if not table:
            continue
        path = out / f"{name}.csv"
        path.write_text(to_csv(table), encoding="utf-8", newline="")
        written.append(path)
        if figures:
            written.append(plotters[name](table, out / f"{name}.png"))
    if not written:
        raise DataError("results contained no rows usable by any report table")
    return written

