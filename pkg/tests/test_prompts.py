from pathlib import Path

import pytest

from beliefbox.core import BeliefBox, Polarity, Proposition
from beliefbox.datasets import make_belief
from beliefbox.errors import DataError, DomainError
from beliefbox.prompts import (
    ALIGNED_TO_MISALIGNED,
    CLARIFICATIONS,
    MISALIGNED_TO_ALIGNED,
    PromptPair,
    beliefs_text,
    fill,
    history_text,
    openness_level_text,
    reassessment_statement,
    render_belief_change,
    render_bfi2,
    render_peer_pressure,
    render_persuasion,
    render_reassessment,
)

GOLDEN = Path(__file__).resolve().parent / "golden"
LEVELS = [1, 2, 3, 4, 5]

BFI_ITEM = "I am someone who is curious about many different things."
PERSUASION_HISTORY = [
    ("Persuading agent", "Selling a policy is the job itself."),
    ("Target agent", "Ignoring the variables is bad faith."),
]
MMLU_HISTORY = [("Agent 1", "Carbon has six protons. (B)"), ("Agent 2", "I agree, it is carbon. (B)")]


def golden(name: str, level: int) -> str:
    return (GOLDEN / f"{name}_L{level}.txt").read_text(encoding="utf-8")


def as_text(pair: PromptPair) -> str:
    return f"### system\n{pair.system}\n### user\n{pair.user}\n"


@pytest.mark.parametrize("level", LEVELS)
def test_golden_bfi2(level):
    assert as_text(render_bfi2(BFI_ITEM, level)) == golden("bfi2", level)


@pytest.mark.parametrize("level", LEVELS)
def test_golden_belief_change(level, insurance):
    assert as_text(render_belief_change(insurance, level, MISALIGNED_TO_ALIGNED)) == golden("belief_change", level)


@pytest.mark.parametrize("level", LEVELS)
def test_golden_persuasion(level, insurance):
    prop, _ = make_belief(insurance, "aligned")
    box = BeliefBox.of((prop, level))
    pair = render_persuasion(
        "persuader", box, level, PERSUASION_HISTORY, prop, sample=insurance, name="Persuading agent"
    )
    assert as_text(pair) == golden("persuasion_persuader", level)


@pytest.mark.parametrize("level", LEVELS)
def test_golden_peer_pressure_mmlu(level, chem):
    prop, _ = make_belief(chem, "correct")
    pair = render_peer_pressure(chem, BeliefBox.of((prop, level)), level, MMLU_HISTORY, name="Agent 3")
    assert as_text(pair) == golden("peer_pressure_mmlu", level)


@pytest.mark.parametrize("level", LEVELS)
def test_golden_reassessment(level, chem):
    prop, _ = make_belief(chem, "correct")
    statement = reassessment_statement(prop, MMLU_HISTORY[:1])
    assert as_text(render_reassessment(statement, level)) == golden("reassessment", level)


def test_fill_is_single_pass():
    assert fill("{A} and {B}", {"A": "{B}", "B": "x"}) == "{B} and x"
    with pytest.raises(KeyError):
        fill("{Missing}", {})


def test_no_placeholder_left_in_any_render(insurance, chem):
    prop, _ = make_belief(insurance, "aligned")
    pairs = [
        render_bfi2("An item.", 3),
        render_belief_change(insurance, 2, ALIGNED_TO_MISALIGNED),
        render_persuasion("target", BeliefBox(), 4, [], sample=insurance, name="Target agent"),
        render_persuasion("persuader", BeliefBox(), 1, [], prop, sample=insurance, name="P"),
        render_peer_pressure(insurance, BeliefBox.of((prop, 5)), 5, [], name="Agent 2"),
        render_peer_pressure(chem, BeliefBox(), 5, [], name="Agent 2"),
        render_reassessment("Belief: x", 1),
    ]
    for pair in pairs:
        for text in (pair.system, pair.user):
            assert "{" not in text and "}" not in text


def test_belief_change_directions(insurance):
    fwd = render_belief_change(insurance, 3, MISALIGNED_TO_ALIGNED).user
    back = render_belief_change(insurance, 3, ALIGNED_TO_MISALIGNED).user
    assert fwd.index(insurance.loser_argument) < fwd.index(insurance.winner_argument)
    assert back.index(insurance.winner_argument) < back.index(insurance.loser_argument)
    with pytest.raises(DomainError):
        render_belief_change(insurance, 3, "sideways")


def test_aporia_peer_pressure_offers_two_choices(insurance):
    pair = render_peer_pressure(insurance, BeliefBox(), 3, [], name="Agent 2")
    assert f"Choices: A: {insurance.aligned_belief}, B: {insurance.misaligned_belief}" in pair.system
    assert pair.user.endswith("selecting the belief you endorse (A or B) after evaluation of all arguments in the discussion.")


def test_persuasion_rejects_bad_inputs(insurance):
    with pytest.raises(DomainError):
        render_persuasion("persuader", BeliefBox(), 1, [], None, sample=insurance, name="P")
    with pytest.raises(DomainError):
        render_persuasion("judge", BeliefBox(), 1, [], sample=insurance, name="P")
    with pytest.raises(DomainError):
        render_persuasion("target", BeliefBox(), 1, [("A", "x"), ("A", "y")], sample=insurance, name="T")


def test_peer_pressure_rejects_unknown_sample():
    with pytest.raises(DataError):
        render_peer_pressure("not a sample", BeliefBox(), 1, [], name="A")


@pytest.mark.parametrize("bad", [0, 6])
def test_levels_validated(bad):
    with pytest.raises(DomainError):
        openness_level_text(bad)
    with pytest.raises(DomainError):
        render_reassessment("s", bad)


def test_beliefs_and_history_text():
    prop = Proposition("x", "Claim.", Polarity.P)
    assert beliefs_text(BeliefBox()) == "none"
    assert beliefs_text(BeliefBox.of((prop, 2))).startswith("Claim. [Belief strength: 2 (Low): ")
    assert history_text([("A", "hi"), ("B", "yo")]) == "A: hi\nB: yo\n"


def test_clarification_appends_line():
    pair = render_reassessment("s", 3).with_clarification(CLARIFICATIONS["likert"])
    assert pair.user.endswith("Updated belief strength:\nAnswer with a single number from 1 to 5.")
    assert [m.role for m in pair.messages()] == ["system", "user"]
