"""Multi-round debates between agents holding belief boxes.

Each round every non-target agent speaks (in list order) and the target
speaks last, each seeing the full history so far. After the round every
agent reassesses each belief it holds through the reassessment prompt.
"""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from .backend import Backend, RequestContext
from .core import BeliefBox, OpenMindedness, Polarity, Proposition
from .datasets import AporiaSample, MMLUSample, Sample, choice_letter
from .errors import BackendError, ConfigError, DataQualityError, DomainError, ParseError
from .parsing import PARSERS
from .prompts import (
    CLARIFICATIONS,
    PromptPair,
    render_peer_pressure,
    render_persuasion,
    render_reassessment,
    reassessment_statement,
)

log = logging.getLogger(__name__)

ROLES = ("target", "persuader", "peer")
PERSUASION = "persuasion"
PEER_PRESSURE = "peer-pressure"
DEFAULT_SENTENCES = {PERSUASION: 10, PEER_PRESSURE: 5}


@dataclass(frozen=True)
class Agent:
    name: str
    box: BeliefBox
    openness: OpenMindedness
    role: str = "peer"
    advocate: Proposition | None = None
    fixed_box: bool = False

    def __post_init__(self) -> None:
        if self.role not in ROLES:
            raise ConfigError(f"unknown agent role {self.role!r}")
        if not self.name:
            raise ConfigError("agent name must be non-empty")


@dataclass(frozen=True)
class DebateConfig:
    rounds: int = 4
    runs: int = 5
    seed: int = 0
    reassess_every_round: bool = True
    max_sentences: Mapping[str, int] | None = None
    max_imputations: int = 1
    change_threshold: int | None = None

    def __post_init__(self) -> None:
        if self.rounds < 1:
            raise ConfigError("rounds must be >= 1")
        if self.runs < 1:
            raise ConfigError("runs must be >= 1")

    def sentences(self, mode: str, role: str) -> int:
        if self.max_sentences and role in self.max_sentences:
            return int(self.max_sentences[role])
        return DEFAULT_SENTENCES[mode]


@dataclass
class Turn:
    kind: str  # "speak" or "reassess"
    round: int
    speaker: str
    role: str
    prompt_system: str
    prompt_user: str
    response: str
    attempts: int = 1
    parsed_choice: str | None = None
    belief_id: str | None = None
    statement: str | None = None
    prev_strength: int | None = None
    reassessed_strength: int | None = None
    imputed: bool = False
    parse_failed: bool = False


@dataclass
class DebateTranscript:
    debate_id: str
    sample_id: str
    run: int
    mode: str
    dataset: str
    rounds: int
    agents: list[dict]
    initial_beliefs: dict[str, list[dict]]
    target: str
    target_initial_choice: str | None
    turns: list[Turn] = field(default_factory=list)
    final_verdicts: dict[str, str | None] = field(default_factory=dict)
    complete: bool = True
    error: str | None = None
    max_imputations: int = 1

    @property
    def speaking_turns(self) -> list[Turn]:
        return [t for t in self.turns if t.kind == "speak"]

    @property
    def reassessments(self) -> list[Turn]:
        return [t for t in self.turns if t.kind == "reassess"]

    def imputations(self, agent: str) -> int:
        return sum(1 for t in self.reassessments if t.speaker == agent and t.imputed)

    @property
    def parse_failures(self) -> int:
        return sum(1 for t in self.turns if t.parse_failed)

    @property
    def exclusion_reason(self) -> str | None:
        if not self.complete:
            return f"incomplete: {self.error}"
        for a in self.agents:
            n = self.imputations(a["name"])
            if n > self.max_imputations:
                return f"{n} imputed reassessments for {a['name']}"
        return None

    @property
    def excluded(self) -> bool:
        return self.exclusion_reason is not None

    def header(self) -> dict:
        return {
            "kind": "debate",
            "debate_id": self.debate_id,
            "sample_id": self.sample_id,
            "run": self.run,
            "mode": self.mode,
            "dataset": self.dataset,
            "rounds": self.rounds,
            "agents": self.agents,
            "initial_beliefs": self.initial_beliefs,
            "target": self.target,
            "target_initial_choice": self.target_initial_choice,
            "final_verdicts": self.final_verdicts,
            "complete": self.complete,
            "error": self.error,
            "excluded": self.excluded,
            "exclusion_reason": self.exclusion_reason,
        }

    def records(self) -> list[dict]:
        """JSON Lines records: one debate header, then one line per turn."""
        out = [self.header()]
        for t in self.turns:
            rec: dict[str, Any] = {
                "kind": t.kind,
                "debate_id": self.debate_id,
                "sample_id": self.sample_id,
                "run": self.run,
                "round": t.round,
                "speaker": t.speaker,
                "role": t.role,
                "prompt_system": t.prompt_system,
                "prompt_user": t.prompt_user,
                "response": t.response,
                "attempts": t.attempts,
            }
            if t.kind == "speak":
                if self.mode == PEER_PRESSURE:
                    rec["parsed_choice"] = t.parsed_choice
            else:
                rec.update(
                    belief_id=t.belief_id,
                    statement=t.statement,
                    prev_strength=t.prev_strength,
                    reassessed_strength=t.reassessed_strength,
                    imputed=t.imputed,
                )
            out.append(rec)
        return out


def write_jsonl(path: str | Path, transcripts: Iterable[DebateTranscript]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for tr in transcripts:
            for rec in tr.records():
                fh.write(json.dumps(rec, ensure_ascii=False, sort_keys=True) + "\n")


def read_jsonl(path: str | Path) -> list[dict]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for i, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise DomainError(f"{path}:{i}: invalid JSON line: {exc}") from exc
    return records


def ask(
    backend: Backend,
    prompt: PromptPair,
    ctx: RequestContext,
    parser: str | None = None,
) -> tuple[PromptPair, str, Any, int]:
    """Send ``prompt``; with a parser, retry once with a clarification line.

    Returns (prompt actually sent last, response, parsed value or None, attempts).
    """
    response = backend.complete(prompt.messages(), ctx)
    if parser is None:
        return prompt, response, None, 1
    parse = PARSERS[parser]
    try:
        return prompt, response, parse(response), 1
    except ParseError:
        pass
    retry = prompt.with_clarification(CLARIFICATIONS[parser])
    response = backend.complete(retry.messages(), _with_attempt(ctx, 1))
    try:
        return retry, response, parse(response), 2
    except ParseError:
        log.info("unparseable %s response after retry: %r", parser, response[:80])
        return retry, response, None, 2


def _with_attempt(ctx: RequestContext, attempt: int) -> RequestContext:
    d = {k: getattr(ctx, k) for k in ctx.__dataclass_fields__}
    d["attempt"] = attempt
    return RequestContext(**d)


def _initial_choice(target: Agent, sample: Sample) -> str | None:
    for prop, _ in target.box:
        if isinstance(sample, MMLUSample):
            letter = choice_letter(prop)
            if letter:
                return letter
        elif prop.pair_id == sample.id:
            return "A" if prop.polarity is Polarity.P else "B"
    return None


def _validate(agents: Sequence[Agent]) -> tuple[str, Agent]:
    if len(agents) < 2:
        raise ConfigError("a debate needs at least two agents")
    names = [a.name for a in agents]
    if len(set(names)) != len(names):
        raise ConfigError(f"agent names must be unique: {names}")
    targets = [a for a in agents if a.role == "target"]
    if len(targets) != 1:
        raise ConfigError(f"a debate needs exactly one target agent, got {len(targets)}")
    roles = {a.role for a in agents if a.role != "target"}
    if roles == {"persuader"}:
        return PERSUASION, targets[0]
    if roles == {"peer"}:
        return PEER_PRESSURE, targets[0]
    raise ConfigError(f"cannot mix persuaders and peers in one debate: {sorted(roles)}")


def run_debate(
    agents: Sequence[Agent],
    sample: Sample,
    config: DebateConfig,
    backend: Backend,
    *,
    run_index: int = 0,
    debate_id: str | None = None,
    context: Mapping[str, Any] | None = None,
) -> DebateTranscript:
    mode, target = _validate(agents)
    if mode == PERSUASION and not isinstance(sample, AporiaSample):
        raise ConfigError("persuasion debates need an Aporia sample")
    for a in agents:
        if a.role == "persuader" and a.advocate is None:
            raise ConfigError(f"persuader {a.name!r} has no belief to advocate")
    order = [a for a in agents if a.role != "target"] + [target]
    extra = dict(context or {})
    did = debate_id or f"{sample.id}/run{run_index}"

    transcript = DebateTranscript(
        debate_id=did,
        sample_id=sample.id,
        run=run_index,
        mode=mode,
        dataset=sample.kind,
        rounds=config.rounds,
        agents=[{"name": a.name, "role": a.role, "openness": a.openness.level} for a in order],
        initial_beliefs={
            a.name: [dict(p.to_dict(), strength=v) for p, v in a.box] for a in order
        },
        target=target.name,
        target_initial_choice=_initial_choice(target, sample) if mode == PEER_PRESSURE else None,
        max_imputations=config.max_imputations,
    )
    boxes = {a.name: a.box for a in order}
    history: list[tuple[str, str]] = []

    def ctx(kind: str, agent: Agent, rnd: int, **more: Any) -> RequestContext:
        return RequestContext(
            kind=kind,
            agent=agent.name,
            role=agent.role,
            round=rnd,
            debate_id=did,
            sample_id=sample.id,
            run=run_index,
            extra={**extra, **more},
        )

    try:
        for rnd in range(1, config.rounds + 1):
            for agent in order:
                sentences = config.sentences(mode, agent.role)
                if mode == PERSUASION:
                    prompt = render_persuasion(
                        "persuader" if agent.role == "persuader" else "target",
                        boxes[agent.name],
                        agent.openness.level,
                        history,
                        agent.advocate,
                        sample=sample,
                        name=agent.name,
                        max_sentences=sentences,
                    )
                    parser = None
                else:
                    prompt = render_peer_pressure(
                        sample, boxes[agent.name], agent.openness.level, history,
                        name=agent.name, max_sentences=sentences,
                    )
                    parser = "choice"
                sent, response, choice, attempts = ask(backend, prompt, ctx("speak", agent, rnd), parser)
                transcript.turns.append(
                    Turn(
                        kind="speak",
                        round=rnd,
                        speaker=agent.name,
                        role=agent.role,
                        prompt_system=sent.system,
                        prompt_user=sent.user,
                        response=response,
                        attempts=attempts,
                        parsed_choice=choice,
                        parse_failed=parser is not None and choice is None,
                    )
                )
                history.append((agent.name, response))

            if not config.reassess_every_round:
                continue
            for agent in order:
                for prop, prev in list(boxes[agent.name]):
                    statement = reassessment_statement(prop, history)
                    prompt = render_reassessment(statement, prev)
                    sent, response, value, attempts = ask(
                        backend, prompt, ctx("reassess", agent, rnd, belief_id=prop.id), "likert"
                    )
                    imputed = value is None
                    new = prev if imputed else value
                    transcript.turns.append(
                        Turn(
                            kind="reassess",
                            round=rnd,
                            speaker=agent.name,
                            role=agent.role,
                            prompt_system=sent.system,
                            prompt_user=sent.user,
                            response=response,
                            attempts=attempts,
                            belief_id=prop.id,
                            statement=statement,
                            prev_strength=prev,
                            reassessed_strength=new,
                            imputed=imputed,
                            parse_failed=imputed,
                        )
                    )
                    if not agent.fixed_box:
                        boxes[agent.name] = boxes[agent.name].set(prop, new)
    except BackendError as exc:
        log.warning("debate %s aborted: %s", did, exc)
        transcript.complete = False
        transcript.error = str(exc)

    if mode == PEER_PRESSURE:
        for agent in order:
            last = [t for t in transcript.speaking_turns if t.speaker == agent.name]
            transcript.final_verdicts[agent.name] = last[-1].parsed_choice if last else None
    return transcript


def trajectory(transcript: DebateTranscript, agent: str | None = None) -> list[int]:
    """Per-round reassessed strength of the agent's initially held belief."""
    name = agent or transcript.target
    initial = transcript.initial_beliefs.get(name)
    if not initial:
        raise DomainError(f"agent {name!r} held no initial belief")
    belief_id = initial[0]["id"]
    by_round = {
        t.round: t.reassessed_strength
        for t in transcript.reassessments
        if t.speaker == name and t.belief_id == belief_id
    }
    if not by_round:
        raise DomainError(f"no reassessments recorded for {name!r}")
    return [by_round.get(r, 0) for r in range(1, transcript.rounds + 1)]


def extract_change(
    transcript: DebateTranscript,
    dataset_kind: str | None = None,
    threshold: int | None = None,
) -> bool:
    """Did the target abandon its initial belief?

    MMLU: the final parsed choice differs from the initially held letter.
    Aporia: the final stance endorses the other belief, or the held belief's
    strength reached 0 (or ``threshold`` when given).
    """
    if transcript.excluded:
        raise DataQualityError(transcript.exclusion_reason)
    kind = dataset_kind or transcript.dataset
    if (kind == "aporia" or threshold is not None) and transcript.reassessments:
        floor = 0 if threshold is None else threshold
        try:
            if min(trajectory(transcript)) <= floor:
                return True
        except DomainError:
            pass
    final = transcript.final_verdicts.get(transcript.target)
    initial = transcript.target_initial_choice
    if initial is None:
        raise DataQualityError(f"{transcript.debate_id}: target held no initial choice")
    valid = ("A", "B") if kind == "aporia" else ("A", "B", "C", "D")
    if final not in valid:
        raise DataQualityError(f"{transcript.debate_id}: no final verdict from target")
    return final != initial
