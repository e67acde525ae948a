"""The four experiment protocols as seeded run matrices.

Every protocol fans independent jobs (condition x sample x run) out over a
thread pool and reduces the results in sorted key order, so tables do not
depend on scheduling.
"""

from __future__ import annotations

import csv
import io
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Hashable, Iterable, Mapping, Sequence

from .backend import Backend, RequestContext
from .core import BeliefBox, OpenMindedness, belief_change_rate, mean_belief_score
from .datasets import AporiaSample, MMLUSample, Sample, make_belief
from .debate import Agent, DebateConfig, DebateTranscript, ask, extract_change, run_debate, trajectory, write_jsonl
from .errors import BackendError, ConfigError, DataError, DataQualityError, UndefinedStatisticError
from .prompts import DIRECTIONS, render_belief_change, render_bfi2
from .stats import f_test_univariate

log = logging.getLogger(__name__)

BFI2_TRAITS = (
    "open-mindedness",
    "conscientiousness",
    "extraversion",
    "agreeableness",
    "negative emotionality",
)
PERSUASION_CONDITIONS = ("p=1", "p=5", "not-p=1", "not-p=5", "neutral")
PERSUADER_NAME = "Persuading agent"
TARGET_NAME = "Target agent"


@dataclass(frozen=True)
class ResultRow:
    experiment: str
    dataset: str
    condition: str
    metric: str
    n: int
    value: float


@dataclass
class ExperimentResult:
    experiment: str
    rows: list[ResultRow] = field(default_factory=list)
    statistics: dict[str, Any] = field(default_factory=dict)
    quality: dict[str, int] = field(default_factory=dict)
    transcripts: list[DebateTranscript] = field(default_factory=list)

    def value(self, condition: str, metric: str | None = None) -> float:
        for row in self.rows:
            if row.condition == condition and (metric is None or row.metric == metric):
                return row.value
        raise KeyError((condition, metric))

    def table(self, metric: str) -> dict[str, float]:
        return {r.condition: r.value for r in self.rows if r.metric == metric}

    def to_csv(self) -> str:
        buf = io.StringIO(newline="")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("experiment", "dataset", "condition", "metric", "n", "value"))
        for r in self.rows:
            w.writerow((r.experiment, r.dataset, r.condition, r.metric, r.n, repr(float(r.value))))
        return buf.getvalue()

    def summary(self) -> dict:
        return {
            "experiment": self.experiment,
            "rows": [r.__dict__ for r in self.rows],
            "statistics": self.statistics,
            "data_quality": self.quality,
        }


def write_outputs(result: ExperimentResult, out_dir: str | Path) -> list[Path]:
    """Write results.csv, summary.json, data_quality.json and transcripts.jsonl."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / "results.csv", out / "summary.json", out / "data_quality.json", out / "transcripts.jsonl"]
    paths[0].write_text(result.to_csv(), encoding="utf-8", newline="")
    paths[1].write_text(json.dumps(result.summary(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    paths[2].write_text(json.dumps(result.quality, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    write_jsonl(paths[3], result.transcripts)
    return paths


def fan_out(jobs: Mapping[Hashable, Callable[[], Any]], concurrency: int = 4) -> dict:
    """Run independent jobs under a concurrency cap; results keyed and sorted."""
    if concurrency < 1:
        raise ConfigError("concurrency must be >= 1")
    keys = sorted(jobs)
    if concurrency == 1 or len(keys) <= 1:
        return {k: jobs[k]() for k in keys}
    with ThreadPoolExecutor(max_workers=concurrency) as pool:
        futures = {k: pool.submit(jobs[k]) for k in keys}
        return {k: futures[k].result() for k in keys}


def _require(samples: Sequence, kind: type, experiment: str) -> None:
    if not samples:
        raise ConfigError(f"{experiment}: dataset is empty")
    if not all(isinstance(s, kind) for s in samples):
        raise ConfigError(f"{experiment}: needs {kind.__name__} records")


# -- BFI-2 -------------------------------------------------------------------


@dataclass(frozen=True)
class BFIItem:
    id: str
    text: str
    trait: str
    reverse: bool = False


def load_item_bank(path: str | Path) -> list[BFIItem]:
    p = Path(path)
    if not p.is_file():
        raise DataError(f"item bank not found: {p}")
    data = json.loads(p.read_text(encoding="utf-8"))
    records = data["items"] if isinstance(data, dict) else data
    items = []
    for i, rec in enumerate(records, start=1):
        try:
            items.append(BFIItem(str(rec["id"]), rec["text"], rec["trait"], bool(rec.get("reverse", False))))
        except (KeyError, TypeError) as exc:
            raise DataError(f"{p}: item {i} is malformed: {exc}") from exc
    return items


def check_item_bank(items: Sequence[BFIItem], traits: Sequence[str] = BFI2_TRAITS) -> None:
    for trait in traits:
        if not any(it.trait == trait for it in items):
            raise ConfigError(f"item bank has no items for trait {trait!r}")
    unknown = {it.trait for it in items} - set(traits)
    if unknown:
        raise ConfigError(f"item bank has unknown trait(s): {sorted(unknown)}")


def keyed(item: BFIItem, response: int) -> int:
    return 6 - response if item.reverse else response


def score_bfi2(responses: Iterable[tuple[BFIItem, int]]) -> dict[str, float]:
    """0-100 trait scores: (mean keyed response - 1) / 4 * 100."""
    sums: dict[str, list[int]] = {}
    for item, r in responses:
        sums.setdefault(item.trait, []).append(keyed(item, r))
    return {t: (sum(v) / len(v) - 1) / 4 * 100 for t, v in sums.items()}


def run_bfi2(
    item_bank: Sequence[BFIItem],
    backend: Backend,
    levels: Sequence[int] = (1, 2, 3, 4, 5),
    runs: int = 3,
    concurrency: int = 1,
) -> ExperimentResult:
    check_item_bank(item_bank)
    if runs < 1:
        raise ConfigError("runs must be >= 1")
    for level in levels:
        OpenMindedness(level)

    def job(level: int, run: int, item: BFIItem) -> int | None:
        ctx = RequestContext(
            kind="bfi2", agent="respondent", run=run,
            extra={"level": level, "item_id": item.id, "trait": item.trait, "reverse": item.reverse},
        )
        try:
            _, _, value, _ = ask(backend, render_bfi2(item.text, level), ctx, "likert")
        except BackendError as exc:
            log.warning("bfi2 item %s failed: %s", item.id, exc)
            return None
        return value

    jobs = {
        (li, run, ii): (lambda l=level, r=run, it=item: job(l, r, it))
        for li, level in enumerate(levels)
        for run in range(runs)
        for ii, item in enumerate(item_bank)
    }
    answers = fan_out(jobs, concurrency)
    result = ExperimentResult("bfi2", quality={"null_observations": 0})
    for li, level in enumerate(levels):
        per_run: dict[str, list[float]] = {}
        counts: dict[str, int] = {}
        for run in range(runs):
            responses = []
            for ii, item in enumerate(item_bank):
                value = answers[(li, run, ii)]
                if value is None:
                    result.quality["null_observations"] += 1
                else:
                    responses.append((item, value))
                    counts[item.trait] = counts.get(item.trait, 0) + 1
            for trait, score in score_bfi2(responses).items():
                per_run.setdefault(trait, []).append(score)
        for trait in BFI2_TRAITS:
            scores = per_run.get(trait)
            if scores:
                result.rows.append(
                    ResultRow("bfi2", "bfi2", f"level={level}", f"score:{trait}", counts[trait], sum(scores) / len(scores))
                )
    return result


# -- open-mindedness via counter-arguments ------------------------------------


def run_openmindedness(
    dataset: Sequence[AporiaSample],
    backend: Backend,
    levels: Sequence[int] = (1, 2, 3, 4, 5),
    directions: Sequence[str] = DIRECTIONS,
    runs: int = 3,
    concurrency: int = 1,
) -> ExperimentResult:
    _require(dataset, AporiaSample, "open-mindedness")
    for d in directions:
        if d not in DIRECTIONS:
            raise ConfigError(f"unknown direction {d!r}")

    def job(level: int, direction: str, sample: AporiaSample, run: int) -> bool | None:
        ctx = RequestContext(
            kind="belief_change", agent="respondent", sample_id=sample.id, run=run,
            extra={"level": level, "direction": direction},
        )
        try:
            _, _, value, _ = ask(backend, render_belief_change(sample, level, direction), ctx, "yes_no")
        except BackendError as exc:
            log.warning("belief change %s failed: %s", sample.id, exc)
            return None
        return value

    jobs = {
        (li, di, si, run): (lambda l=level, d=direction, s=sample, r=run: job(l, d, s, r))
        for li, level in enumerate(levels)
        for di, direction in enumerate(directions)
        for si, sample in enumerate(dataset)
        for run in range(runs)
    }
    answers = fan_out(jobs, concurrency)
    result = ExperimentResult("open-mindedness", quality={"null_observations": 0})
    for li, level in enumerate(levels):
        for di, direction in enumerate(directions):
            outcomes = []
            for si in range(len(dataset)):
                for run in range(runs):
                    v = answers[(li, di, si, run)]
                    if v is None:
                        result.quality["null_observations"] += 1
                    else:
                        outcomes.append(v)
            if outcomes:
                result.rows.append(
                    ResultRow(
                        "open-mindedness", "aporia", f"level={level},direction={direction}",
                        "change_rate", len(outcomes), belief_change_rate(outcomes),
                    )
                )
    return result


# -- persuasion ----------------------------------------------------------------


def persuader_box(sample: AporiaSample, condition: str) -> BeliefBox:
    label = condition.replace("¬p", "not-p").replace(" ", "")
    if label == "neutral":
        return BeliefBox()
    head, _, strength = label.partition("=")
    if head not in ("p", "not-p") or strength not in ("1", "2", "3", "4", "5"):
        raise ConfigError(f"unknown persuasion condition {condition!r}")
    stance = "aligned" if head == "p" else "misaligned"
    return BeliefBox.of(make_belief(sample, stance, int(strength)))


def persuasion_agents(
    sample: AporiaSample, condition: str, target_level: int = 5, persuader_level: int = 1
) -> list[Agent]:
    aligned, _ = make_belief(sample, "aligned", 5)
    return [
        Agent(
            PERSUADER_NAME,
            persuader_box(sample, condition),
            OpenMindedness(persuader_level),
            role="persuader",
            advocate=aligned,
            fixed_box=True,
        ),
        Agent(TARGET_NAME, BeliefBox.of(make_belief(sample, "misaligned", 5)), OpenMindedness(target_level), role="target"),
    ]


def _count_quality(result: ExperimentResult, transcripts: Iterable[DebateTranscript]) -> None:
    q = result.quality
    for key in ("debates", "excluded_debates", "incomplete_debates", "parse_failures", "imputations"):
        q.setdefault(key, 0)
    for tr in transcripts:
        q["debates"] += 1
        q["parse_failures"] += tr.parse_failures
        q["imputations"] += sum(tr.imputations(a["name"]) for a in tr.agents)
        if not tr.complete:
            q["incomplete_debates"] += 1
        if tr.excluded:
            q["excluded_debates"] += 1
            log.info("excluded %s: %s", tr.debate_id, tr.exclusion_reason)


def run_persuasion(
    dataset: Sequence[AporiaSample],
    backend: Backend,
    conditions: Sequence[str] = PERSUASION_CONDITIONS,
    config: DebateConfig = DebateConfig(),
    target_level: int = 5,
    persuader_level: int = 1,
    concurrency: int = 4,
) -> ExperimentResult:
    _require(dataset, AporiaSample, "persuasion")
    for c in conditions:
        persuader_box(dataset[0], c)

    def job(condition: str, sample: AporiaSample, run: int) -> DebateTranscript:
        agents = persuasion_agents(sample, condition, target_level, persuader_level)
        return run_debate(
            agents, sample, config, backend, run_index=run,
            debate_id=f"persuasion/{condition}/{sample.id}/run{run}",
            context={"experiment": "persuasion", "condition": condition},
        )

    jobs = {
        (ci, si, run): (lambda c=condition, s=sample, r=run: job(c, s, r))
        for ci, condition in enumerate(conditions)
        for si, sample in enumerate(dataset)
        for run in range(config.runs)
    }
    transcripts = fan_out(jobs, concurrency)
    result = ExperimentResult("persuasion", transcripts=list(transcripts.values()))
    _count_quality(result, result.transcripts)
    for ci, condition in enumerate(conditions):
        run_means = []
        n = 0
        for run in range(config.runs):
            trajs = []
            for si in range(len(dataset)):
                tr = transcripts[(ci, si, run)]
                if not tr.excluded:
                    trajs.append(trajectory(tr))
            if trajs:
                run_means.append(mean_belief_score(trajs))
                n += len(trajs)
        if run_means:
            result.rows.append(
                ResultRow("persuasion", "aporia", condition, "mean_belief_score", n, sum(run_means) / len(run_means))
            )
    return result


# -- peer pressure ---------------------------------------------------------------


def peer_pressure_agents(
    sample: Sample, group_size: int, seed: int | str, openness: int = 5, strength: int = 5
) -> list[Agent]:
    if group_size < 1:
        raise ConfigError("peer group size must be >= 1")
    if isinstance(sample, MMLUSample):
        own, other = "correct", "incorrect"
    else:
        own, other = "aligned", "misaligned"
    peer_belief = make_belief(sample, other, strength, seed)
    agents = [
        Agent(f"Agent {i}", BeliefBox.of(peer_belief), OpenMindedness(openness), role="peer")
        for i in range(1, group_size + 1)
    ]
    agents.append(
        Agent(
            f"Agent {group_size + 1}",
            BeliefBox.of(make_belief(sample, own, strength, seed)),
            OpenMindedness(openness),
            role="target",
        )
    )
    return agents


def regression_statistics(pairs: Sequence[tuple[float, float]]) -> dict[str, Any]:
    """Pearson r and the univariate F-test over (x, y) pairs, or the reason they are omitted."""
    x = [p[0] for p in pairs]
    y = [p[1] for p in pairs]
    try:
        rep = f_test_univariate(x, y)
    except (UndefinedStatisticError, ValueError) as exc:
        return {"omitted": str(exc), "n": len(pairs)}
    return {
        "pearson_r": rep.r,
        "f_statistic": rep.F,
        "p_value": rep.p,
        "slope": rep.slope,
        "intercept": rep.intercept,
        "df1": rep.df[0],
        "df2": rep.df[1],
        "n": rep.n,
        "perfect_fit": rep.perfect_fit,
    }


def run_peer_pressure(
    dataset: Sequence[Sample],
    backend: Backend,
    group_sizes: Sequence[int] | None = None,
    config: DebateConfig = DebateConfig(),
    openness: int = 5,
    strength: int = 5,
    concurrency: int = 4,
) -> ExperimentResult:
    if not dataset:
        raise ConfigError("peer-pressure: dataset is empty")
    kind = dataset[0].kind
    if any(s.kind != kind for s in dataset):
        raise ConfigError("peer-pressure: mixed dataset kinds")
    if group_sizes is None:
        group_sizes = (1, 3) if kind == "mmlu" else (1, 2, 3, 4)
    for g in group_sizes:
        if int(g) < 1:
            raise ConfigError(f"peer group size must be >= 1, got {g}")

    def job(size: int, sample: Sample, run: int) -> DebateTranscript:
        agents = peer_pressure_agents(sample, size, f"{config.seed}:{sample.id}:{run}", openness, strength)
        return run_debate(
            agents, sample, config, backend, run_index=run,
            debate_id=f"peer-pressure/size{size}/{sample.id}/run{run}",
            context={"experiment": "peer-pressure", "group_size": size},
        )

    jobs = {
        (gi, si, run): (lambda g=size, s=sample, r=run: job(g, s, r))
        for gi, size in enumerate(group_sizes)
        for si, sample in enumerate(dataset)
        for run in range(config.runs)
    }
    transcripts = fan_out(jobs, concurrency)
    result = ExperimentResult("peer-pressure", transcripts=list(transcripts.values()))
    _count_quality(result, result.transcripts)
    result.quality.setdefault("missing_verdicts", 0)
    pairs: list[tuple[float, float]] = []
    for gi, size in enumerate(group_sizes):
        outcomes = []
        for si in range(len(dataset)):
            for run in range(config.runs):
                tr = transcripts[(gi, si, run)]
                if tr.excluded:
                    continue
                try:
                    changed = extract_change(tr, kind, config.change_threshold)
                except DataQualityError:
                    result.quality["missing_verdicts"] += 1
                    continue
                outcomes.append(changed)
                pairs.append((float(size), 1.0 if changed else 0.0))
        if outcomes:
            result.rows.append(
                ResultRow("peer-pressure", kind, f"group_size={size}", "change_rate", len(outcomes), belief_change_rate(outcomes))
            )
    result.statistics = regression_statistics(pairs)
    if "omitted" not in result.statistics:
        n = result.statistics["n"]
        for metric in ("pearson_r", "f_statistic", "p_value", "slope", "intercept"):
            result.rows.append(ResultRow("peer-pressure", kind, "pooled", metric, n, result.statistics[metric]))
    return result
