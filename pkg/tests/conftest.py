from __future__ import annotations

import sys
from importlib import resources
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from beliefbox.datasets import AporiaSample, load_aporia, load_mmlu  # noqa: E402

DATA = resources.files("beliefbox") / "data"


@pytest.fixture
def aporia_path() -> Path:
    return Path(str(DATA / "aporia_fixture.json"))


@pytest.fixture
def mmlu_path() -> Path:
    return Path(str(DATA / "mmlu_fixture.csv"))


@pytest.fixture
def bank_path() -> Path:
    return Path(str(DATA / "bfi2_synthetic.json"))


@pytest.fixture
def insurance(aporia_path) -> AporiaSample:
    return load_aporia(aporia_path)[0]


@pytest.fixture
def chem(mmlu_path):
    return load_mmlu(mmlu_path)[0]


def synthetic_aporia(n: int) -> list[AporiaSample]:
    """``n`` small, distinct Aporia-style records for scripted runs."""
    return [
        AporiaSample(
            id=f"gen-{i:02d}",
            scenario=f"A professional takes action number {i}.",
            profession_description=f"Professional {i} follows a code of conduct.",
            rule=f"Rule {i}: act in good faith.",
            aligned_belief=f"Action {i} complies with the rule.",
            misaligned_belief=f"Action {i} violates the rule.",
            winner_argument=f"Action {i} is part of the normal job.",
            loser_argument=f"Action {i} could hide bad intent.",
        )
        for i in range(n)
    ]
