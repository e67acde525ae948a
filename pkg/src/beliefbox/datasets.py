"""Loading, sampling and belief construction for the two dataset shapes.

MMLU-style data is a CSV with columns
``subject,question,choice_a,choice_b,choice_c,choice_d,answer`` (plus an
optional ``id``). Aporia-style data is a JSON array of objects carrying the
seven fields of :class:`AporiaSample` (plus an optional ``id``).
"""

from __future__ import annotations

import csv
import io
import json
import random
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Sequence, TypeVar, Union

from .core import Polarity, Proposition, check_strength
from .errors import DataError, DomainError

LETTERS = ("A", "B", "C", "D")
MMLU_COLUMNS = ("subject", "question", "choice_a", "choice_b", "choice_c", "choice_d", "answer")
APORIA_FIELDS = (
    "scenario",
    "profession_description",
    "rule",
    "aligned_belief",
    "misaligned_belief",
    "winner_argument",
    "loser_argument",
)

T = TypeVar("T")


@dataclass(frozen=True)
class MMLUSample:
    id: str
    subject: str
    question: str
    choices: tuple[str, str, str, str]
    correct: str

    kind = "mmlu"

    def __post_init__(self) -> None:
        if len(self.choices) != 4:
            raise DataError(f"{self.id}: MMLU sample needs exactly 4 choices, got {len(self.choices)}")
        if self.correct not in LETTERS:
            raise DataError(f"{self.id}: answer must be one of A-D, got {self.correct!r}")
        for name, value in (("subject", self.subject), ("question", self.question)):
            if not value or not value.strip():
                raise DataError(f"{self.id}: field {name!r} is empty")
        for letter, choice in zip(LETTERS, self.choices):
            if not choice or not choice.strip():
                raise DataError(f"{self.id}: choice {letter} is empty")

    def choice(self, letter: str) -> str:
        return self.choices[LETTERS.index(letter)]


@dataclass(frozen=True)
class AporiaSample:
    id: str
    scenario: str
    profession_description: str
    rule: str
    aligned_belief: str
    misaligned_belief: str
    winner_argument: str
    loser_argument: str

    kind = "aporia"

    def __post_init__(self) -> None:
        for name in APORIA_FIELDS:
            value = getattr(self, name)
            if not isinstance(value, str) or not value.strip():
                raise DataError(f"{self.id}: field {name!r} is missing or empty")
        if self.aligned_belief.strip() == self.misaligned_belief.strip():
            raise DataError(f"{self.id}: aligned and misaligned beliefs are identical")

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


Sample = Union[MMLUSample, AporiaSample]


def _read_text(path: str | Path) -> str:
    p = Path(path)
    if not p.is_file():
        raise DataError(f"dataset file not found: {p}")
    return p.read_text(encoding="utf-8")


def load_mmlu(path: str | Path) -> list[MMLUSample]:
    text = _read_text(path)
    if not text.strip():
        return []
    reader = csv.DictReader(io.StringIO(text, newline=""))
    header = reader.fieldnames or []
    missing = [c for c in MMLU_COLUMNS if c not in header]
    if missing:
        raise DataError(f"{path}: missing column(s) {', '.join(missing)}")
    samples = []
    for i, row in enumerate(reader, start=1):
        if None in row:
            raise DataError(f"{path}: row {i} has more fields than the header")
        for col in MMLU_COLUMNS:
            if row.get(col) is None or not row[col].strip():
                raise DataError(f"{path}: row {i} field {col!r} is missing or empty")
        sid = (row.get("id") or "").strip() or f"mmlu-{i:04d}"
        answer = row["answer"].strip().upper()
        try:
            samples.append(
                MMLUSample(
                    id=sid,
                    subject=row["subject"],
                    question=row["question"],
                    choices=tuple(row[c] for c in MMLU_COLUMNS[2:6]),
                    correct=answer,
                )
            )
        except DataError as exc:
            raise DataError(f"{path}: row {i}: {exc}") from exc
    return samples


def dump_mmlu(samples: Sequence[MMLUSample]) -> str:
    """Canonical CSV form (RFC 4180 line endings, minimal quoting)."""
    buf = io.StringIO(newline="")
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(("id",) + MMLU_COLUMNS)
    for s in samples:
        writer.writerow((s.id, s.subject, s.question, *s.choices, s.correct))
    return buf.getvalue()


def load_aporia(path: str | Path) -> list[AporiaSample]:
    text = _read_text(path)
    if not text.strip():
        return []
    try:
        records = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(records, list):
        raise DataError(f"{path}: expected a JSON array of records")
    samples = []
    for i, rec in enumerate(records, start=1):
        if not isinstance(rec, dict):
            raise DataError(f"{path}: record {i} is not an object")
        for name in APORIA_FIELDS:
            value = rec.get(name)
            if not isinstance(value, str) or not value.strip():
                raise DataError(f"{path}: record {i} field {name!r} is missing or empty")
        sid = str(rec.get("id") or f"aporia-{i:04d}")
        try:
            samples.append(AporiaSample(id=sid, **{k: rec[k] for k in APORIA_FIELDS}))
        except DataError as exc:
            raise DataError(f"{path}: record {i}: {exc}") from exc
    return samples


def dump_aporia(samples: Sequence[AporiaSample]) -> str:
    return json.dumps([s.to_dict() for s in samples], indent=2, ensure_ascii=False) + "\n"


def load_dataset(path: str | Path, kind: str | None = None) -> list[Sample]:
    """Load either dataset shape, inferring the kind from the extension."""
    if kind is None:
        suffix = Path(path).suffix.lower()
        kind = {".csv": "mmlu", ".json": "aporia"}.get(suffix)
        if kind is None:
            raise DataError(f"cannot infer dataset kind from {path}; pass kind explicitly")
    if kind == "mmlu":
        return load_mmlu(path)
    if kind == "aporia":
        return load_aporia(path)
    raise DataError(f"unknown dataset kind {kind!r}")


def sample_items(items: Sequence[T], n: int, seed: int | str) -> list[T]:
    """Uniform sample without replacement, deterministic in ``seed``."""
    if n < 0 or n > len(items):
        raise DomainError(f"cannot sample {n} items from {len(items)}")
    return random.Random(seed).sample(list(items), n)


STANCES = {"mmlu": ("correct", "incorrect"), "aporia": ("aligned", "misaligned")}


def make_belief(
    sample: Sample, stance: str, strength: int = 5, seed: int | str = 0
) -> tuple[Proposition, int]:
    """Build the proposition an agent holds for ``sample`` under ``stance``.

    For MMLU the incorrect stance picks one of the three wrong letters with a
    ``random.Random(seed)`` draw, so every peer built with the same seed
    argues for the same wrong answer.
    """
    strength = check_strength(strength, allow_zero=False)
    if stance not in STANCES[sample.kind]:
        raise DomainError(f"stance {stance!r} is not valid for {sample.kind} samples")
    if isinstance(sample, MMLUSample):
        if stance == "correct":
            letter = sample.correct
            polarity = Polarity.P
        else:
            wrong = [c for c in LETTERS if c != sample.correct]
            letter = random.Random(seed).choice(wrong)
            polarity = Polarity.NOT_P
        prop = Proposition(
            id=f"{sample.id}/answer-{letter}",
            statement=f"The answer is {letter}: {sample.choice(letter)}",
            polarity=polarity,
            pair_id=sample.id,
        )
        return prop, strength
    if stance == "aligned":
        prop = Proposition(f"{sample.id}/aligned", sample.aligned_belief, Polarity.P, sample.id)
    else:
        prop = Proposition(f"{sample.id}/misaligned", sample.misaligned_belief, Polarity.NOT_P, sample.id)
    return prop, strength


def choice_letter(prop: Proposition) -> str | None:
    """The answer letter encoded in an MMLU proposition id, if any."""
    head, _, tail = prop.id.rpartition("/answer-")
    return tail if head and tail in LETTERS else None
