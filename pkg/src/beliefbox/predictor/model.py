"""Predicting belief updates from agent output text.

The regressors never see the previous strength: they predict the update
``next - prev`` from TF-IDF features of the statement, and the new strength
is ``prev + update`` rounded half-up and clamped to the scale.
"""

from __future__ import annotations

import json
import random
import statistics
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from ..core import MAX_STRENGTH, MIN_STRENGTH, check_strength, round_half_up
from ..errors import DataError, DomainError
from ..stats import mae
from .forest import ForestModel, fit_forest
from .ridge import RidgeModel, fit_ridge
from .tfidf import TfidfModel, fit_tfidf

FORMAT_VERSION = 1
PENALTY_GRID = (0.1, 1.0, 10.0)


@dataclass(frozen=True)
class BeliefUpdateExample:
    statement: str
    prev: int
    next: int

    def __post_init__(self) -> None:
        check_strength(self.prev, allow_zero=False)
        check_strength(self.next, allow_zero=False)

    @property
    def update(self) -> int:
        return self.next - self.prev


def split_dataset(examples: Sequence, seed: int = 0) -> tuple[list, list, list]:
    """Shuffled 70/10/20 partition: floor(0.7n), floor(0.1n), remainder."""
    items = list(examples)
    random.Random(seed).shuffle(items)
    n = len(items)
    n_train = (7 * n) // 10
    n_val = n // 10
    return items[:n_train], items[n_train : n_train + n_val], items[n_train + n_val :]


@dataclass
class BeliefPredictor:
    tfidf: TfidfModel
    regressor: RidgeModel | ForestModel
    config: dict

    @property
    def kind(self) -> str:
        return "ridge" if isinstance(self.regressor, RidgeModel) else "forest"

    def predict_update(self, statements: Sequence[str]) -> np.ndarray:
        return self.regressor.predict(self.tfidf.transform_many(statements))

    def to_dict(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "vocabulary": self.tfidf.to_dict()["vocabulary"],
            "idf": self.tfidf.to_dict()["idf"],
            "tokenizer": {"min_token_len": self.tfidf.min_token_len, "lowercase": True},
            "n_documents": self.tfidf.n_documents,
            "regressor": self.regressor.to_dict(),
            "config": self.config,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BeliefPredictor":
        if d.get("format_version") != FORMAT_VERSION:
            raise DataError(f"unsupported model format_version {d.get('format_version')!r}")
        tfidf = TfidfModel.from_dict(
            {
                "vocabulary": d["vocabulary"],
                "idf": d["idf"],
                "min_token_len": d["tokenizer"]["min_token_len"],
                "n_documents": d.get("n_documents", 0),
            }
        )
        reg = d["regressor"]
        if reg["kind"] == "ridge":
            regressor = RidgeModel.from_dict(reg)
        elif reg["kind"] == "forest":
            regressor = ForestModel.from_dict(reg)
        else:
            raise DataError(f"unknown regressor kind {reg['kind']!r}")
        return cls(tfidf, regressor, d.get("config", {}))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), sort_keys=True) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "BeliefPredictor":
        p = Path(path)
        if not p.is_file():
            raise DataError(f"model file not found: {p}")
        return cls.from_dict(json.loads(p.read_text(encoding="utf-8")))


def predict_new_strength(model: BeliefPredictor, statement: str, prev: int) -> int:
    if isinstance(prev, bool) or prev not in (1, 2, 3, 4, 5):
        raise DomainError(f"previous strength must be 1..5, got {prev!r}")
    delta = float(model.predict_update([statement])[0])
    return min(MAX_STRENGTH, max(MIN_STRENGTH, round_half_up(prev + delta)))


def _fit_regressor(kind: str, X, y, penalty: float, seed: int, trees: int):
    if kind == "ridge":
        return fit_ridge(X, y, penalty)
    if kind == "forest":
        return fit_forest(X, y, trees=trees, seed=seed)
    raise DomainError(f"unknown regressor {kind!r}")


def train_predictor(
    train: Sequence[BeliefUpdateExample],
    validation: Sequence[BeliefUpdateExample] = (),
    kind: str = "ridge",
    seed: int = 0,
    trees: int = 100,
    min_token_len: int = 2,
    penalty: float | None = None,
) -> BeliefPredictor:
    """Fit TF-IDF on the training statements, then the update regressor.

    For ridge with no explicit penalty the validation split picks one from
    ``PENALTY_GRID`` by MAE of predicted next strengths.
    """
    if not train:
        raise DomainError("training split is empty")
    tfidf = fit_tfidf([e.statement for e in train], min_token_len)
    X = tfidf.transform_many([e.statement for e in train])
    y = np.array([e.update for e in train], dtype=float)
    config = {"kind": kind, "seed": seed, "min_token_len": min_token_len}
    if kind == "ridge" and penalty is None:
        if validation:
            scores = {}
            for lam in PENALTY_GRID:
                candidate = BeliefPredictor(tfidf, fit_ridge(X, y, lam), config)
                scores[lam] = evaluate(candidate, validation)["mae"]
            penalty = min(PENALTY_GRID, key=lambda lam: (scores[lam], lam))
            config["validation_mae"] = {str(k): v for k, v in scores.items()}
        else:
            penalty = 1.0
    if kind == "ridge":
        config["penalty"] = penalty
    else:
        config["trees"] = trees
    return BeliefPredictor(tfidf, _fit_regressor(kind, X, y, penalty or 1.0, seed, trees), config)


def evaluate(
    model: BeliefPredictor,
    examples: Sequence[BeliefUpdateExample],
    baseline_value: float | None = None,
) -> dict:
    """MAE of predicted next strengths, plus a constant-median baseline.

    The baseline predicts ``baseline_value`` for every example (by default
    the median next strength of ``examples``).
    """
    if not examples:
        raise DomainError("cannot evaluate on an empty test set")
    preds = [predict_new_strength(model, e.statement, e.prev) for e in examples]
    truth = [e.next for e in examples]
    if baseline_value is None:
        baseline_value = float(statistics.median(truth))
    return {
        "n": len(examples),
        "mae": mae(preds, truth),
        "baseline_value": baseline_value,
        "baseline_mae": mae([baseline_value] * len(truth), truth),
    }


def fit_and_evaluate(
    examples: Sequence[BeliefUpdateExample], kind: str = "ridge", seed: int = 0, trees: int = 100
) -> tuple[BeliefPredictor, dict]:
    """The full 70/10/20 protocol; the baseline median comes from the train split."""
    train, val, test = split_dataset(examples, seed)
    model = train_predictor(train, val, kind=kind, seed=seed, trees=trees)
    median = float(statistics.median(e.next for e in train))
    report = evaluate(model, test, baseline_value=median)
    report.update(split={"train": len(train), "validation": len(val), "test": len(test)})
    return model, report


GRANULARITIES = ("prompt", "last_turn")


def mine_examples(records: Iterable[dict], granularity: str = "prompt") -> list[BeliefUpdateExample]:
    """Training pairs from transcript JSON Lines records (non-imputed reassessments).

    ``granularity="prompt"`` uses the statement exactly as shown in the
    reassessment prompt; ``"last_turn"`` uses only the most recent speaking
    turn of the same debate.
    """
    if granularity not in GRANULARITIES:
        raise DomainError(f"granularity must be one of {GRANULARITIES}, got {granularity!r}")
    out = []
    last_turn: dict[str, str] = {}
    for rec in records:
        kind = rec.get("kind")
        if kind == "speak":
            last_turn[rec.get("debate_id")] = rec.get("response", "")
            continue
        if kind != "reassess" or rec.get("imputed"):
            continue
        prev, nxt = rec.get("prev_strength"), rec.get("reassessed_strength")
        text = rec.get("statement") if granularity == "prompt" else last_turn.get(rec.get("debate_id"))
        if prev in (1, 2, 3, 4, 5) and nxt in (1, 2, 3, 4, 5) and text:
            out.append(BeliefUpdateExample(text, prev, nxt))
    return out


def load_examples(path: str | Path, granularity: str = "prompt") -> list[BeliefUpdateExample]:
    """Read examples from JSON Lines: either transcripts or {statement, prev, next} rows."""
    p = Path(path)
    if not p.is_file():
        raise DataError(f"examples file not found: {p}")
    records = [json.loads(line) for line in p.read_text(encoding="utf-8").splitlines() if line.strip()]
    if any("kind" in r for r in records):
        return mine_examples(records, granularity)
    try:
        return [BeliefUpdateExample(r["statement"], int(r["prev"]), int(r["next"])) for r in records]
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"{p}: malformed example row: {exc}") from exc


def write_examples(path: str | Path, examples: Iterable[BeliefUpdateExample]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for e in examples:
            fh.write(json.dumps({"statement": e.statement, "prev": e.prev, "next": e.next}) + "\n")


_FILLER = (
    "the argument about the rule raises several points worth weighing carefully "
    "scenario evidence context professional client policy standard duty practice "
    "reasoning perspective view claim position discussion point detail case record "
    "however moreover therefore because although while since given that overall"
).split()


def synthetic_corpus(n: int = 2000, seed: int = 0) -> list[BeliefUpdateExample]:
    """Rule-generated examples: update +1 with "agree", -2 with "concede", else 0.

    The next strength is drawn uniformly from 1..5 and the rule is chosen
    among those that keep the previous strength on the scale.
    """
    rng = random.Random(seed)
    out = []
    for _ in range(n):
        nxt = rng.randint(1, 5)
        options = [0]
        if nxt >= 2:
            options.append(1)
        if nxt <= 3:
            options.append(-2)
        update = rng.choice(options)
        words = rng.choices(_FILLER, k=rng.randint(6, 14))
        if update == 1:
            words.insert(rng.randrange(len(words) + 1), "agree")
        elif update == -2:
            words.insert(rng.randrange(len(words) + 1), "concede")
        out.append(BeliefUpdateExample(" ".join(words).capitalize() + ".", nxt - update, nxt))
    return out
