"""Belief boxes, open-mindedness and the belief revision arithmetic.

A belief box maps propositions to integer strengths on a 1-5 Likert scale.
Strength 0 means "not in the box" and is never stored. Revision follows

    v' = v + a * lambda

where ``a`` is the argumentative force of an argument on one proposition and
``lambda`` the open-mindedness coefficient of the agent, rounded half-up
back onto the integer scale and clamped to [0, 5].
"""

from __future__ import annotations

import enum
import math
import numbers
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import DataError, DomainError

MIN_STRENGTH = 0
MAX_STRENGTH = 5
LEVELS = (1, 2, 3, 4, 5)


class Polarity(str, enum.Enum):
    P = "p"
    NOT_P = "not-p"

    def opposite(self) -> "Polarity":
        return Polarity.NOT_P if self is Polarity.P else Polarity.P


@dataclass(frozen=True)
class Proposition:
    id: str
    statement: str
    polarity: Polarity = Polarity.P
    pair_id: str | None = None

    def __post_init__(self) -> None:
        if not self.statement or not self.statement.strip():
            raise DomainError(f"proposition {self.id!r} has an empty statement")
        object.__setattr__(self, "polarity", Polarity(self.polarity))
        if self.pair_id is None:
            object.__setattr__(self, "pair_id", self.id)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "statement": self.statement,
            "polarity": self.polarity.value,
            "pair_id": self.pair_id,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "Proposition":
        return cls(
            id=str(d["id"]),
            statement=d["statement"],
            polarity=Polarity(d.get("polarity", "p")),
            pair_id=d.get("pair_id"),
        )


def check_strength(value: int, *, allow_zero: bool = True) -> int:
    """Validate a belief strength and return it as a plain int."""
    if isinstance(value, float) and value.is_integer():
        value = int(value)
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise DomainError(f"belief strength must be an integer, got {value!r}")
    v = int(value)
    lo = MIN_STRENGTH if allow_zero else 1
    if not lo <= v <= MAX_STRENGTH:
        raise DomainError(f"belief strength {v} outside {lo}..{MAX_STRENGTH}")
    return v


@dataclass(frozen=True)
class OpenMindedness:
    level: int

    def __post_init__(self) -> None:
        openness_coefficient(self.level)

    @property
    def coefficient(self) -> float:
        return openness_coefficient(self.level)


def openness_coefficient(level: int) -> float:
    """Map an open-mindedness level 1..5 linearly onto [0, 1]."""
    if isinstance(level, bool) or not isinstance(level, numbers.Integral) or level not in LEVELS:
        raise DomainError(f"open-mindedness level must be 1..5, got {level!r}")
    return (int(level) - 1) / 4


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def revise_strength(prev: int, force: float, openness: float) -> int:
    """Apply one argument to one belief strength.

    >>> revise_strength(3, 2.0, 0.5)
    4
    """
    prev = check_strength(prev)
    if not math.isfinite(force):
        raise DomainError(f"argumentative force must be finite, got {force!r}")
    if not (0.0 <= openness <= 1.0):
        raise DomainError(f"openness coefficient must lie in [0, 1], got {openness!r}")
    if force == 0 or openness == 0:
        return prev
    v = round_half_up(prev + force * openness)
    return min(MAX_STRENGTH, max(MIN_STRENGTH, v))


@dataclass(frozen=True)
class BeliefBox:
    """Immutable set of (proposition, strength) entries.

    Holding a proposition with nonzero strength excludes its paired opposite;
    setting one member of a pair deletes the other.
    """

    beliefs: tuple[tuple[Proposition, int], ...] = field(default=())

    def __post_init__(self) -> None:
        seen: dict[str, Proposition] = {}
        pairs: dict[str, Proposition] = {}
        for prop, strength in self.beliefs:
            check_strength(strength, allow_zero=False)
            if prop.id in seen:
                raise DomainError(f"duplicate proposition {prop.id!r} in belief box")
            other = pairs.get(prop.pair_id)
            if other is not None:
                raise DomainError(
                    f"belief box holds both {other.id!r} and {prop.id!r} of pair {prop.pair_id!r}"
                )
            seen[prop.id] = prop
            pairs[prop.pair_id] = prop

    @classmethod
    def of(cls, *entries: tuple[Proposition, int]) -> "BeliefBox":
        return cls().update(entries)

    def __len__(self) -> int:
        return len(self.beliefs)

    def __iter__(self) -> Iterator[tuple[Proposition, int]]:
        return iter(self.beliefs)

    def __contains__(self, prop_id: object) -> bool:
        return any(p.id == prop_id for p, _ in self.beliefs)

    @property
    def is_empty(self) -> bool:
        return not self.beliefs

    def strength(self, prop_id: str) -> int:
        for p, v in self.beliefs:
            if p.id == prop_id:
                return v
        return 0

    def get(self, prop_id: str) -> Proposition | None:
        for p, _ in self.beliefs:
            if p.id == prop_id:
                return p
        return None

    def set(self, prop: Proposition, strength: int) -> "BeliefBox":
        """Return a new box with ``prop`` at ``strength`` (0 deletes it)."""
        strength = check_strength(strength)
        kept = []
        replaced = False
        for p, v in self.beliefs:
            if p.id == prop.id:
                replaced = True
                if strength:
                    kept.append((prop, strength))
            elif strength and p.pair_id == prop.pair_id:
                continue
            else:
                kept.append((p, v))
        if not replaced and strength:
            kept.append((prop, strength))
        return BeliefBox(tuple(kept))

    def update(self, entries: Iterable[tuple[Proposition, int]]) -> "BeliefBox":
        box = self
        for prop, strength in entries:
            box = box.set(prop, strength)
        return box

    def revise(self, forces: Mapping[str, float], openness: float) -> "BeliefBox":
        """Apply a force vector (proposition id -> force) to every held belief."""
        box = self
        for prop, v in self.beliefs:
            a = forces.get(prop.id, 0.0)
            box = box.set(prop, revise_strength(v, a, openness))
        return box

    def to_json(self) -> dict:
        return {
            "beliefs": [
                {"id": p.id, "statement": p.statement, "strength": v}
                for p, v in self.beliefs
            ]
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "BeliefBox":
        try:
            items = data["beliefs"]
            entries = [
                (Proposition(id=str(b["id"]), statement=b["statement"]), b["strength"])
                for b in items
            ]
        except (KeyError, TypeError) as exc:
            raise DataError(f"malformed belief box JSON: {exc}") from exc
        box = cls()
        for prop, strength in entries:
            check_strength(strength, allow_zero=False)
            box = box.set(prop, strength)
        return box


def belief_change_rate(outcomes: Sequence[bool]) -> float:
    """Fraction of trials in which the target changed its belief."""
    if len(outcomes) == 0:
        raise DomainError("belief_change_rate needs at least one outcome")
    return sum(1 for o in outcomes if o) / len(outcomes)


def mean_belief_score(trajectories: Sequence[Sequence[int]]) -> float:
    """Mean over rounds within each trajectory, then mean across trajectories."""
    if len(trajectories) == 0:
        raise DomainError("mean_belief_score needs at least one trajectory")
    per_sample = []
    for traj in trajectories:
        if len(traj) == 0:
            raise DomainError("empty belief trajectory")
        for v in traj:
            check_strength(v)
        per_sample.append(sum(traj) / len(traj))
    return sum(per_sample) / len(per_sample)
