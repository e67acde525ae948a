"""Chat-completion backends: a live HTTP client and a scripted stand-in.

Both expose ``complete(messages, context=None) -> str``. The context tells a
scripted backend who is asking (agent, round, request kind); the HTTP backend
ignores it.
"""

from __future__ import annotations

import json
import logging
import random
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Mapping, Protocol, Sequence

import httpx

from .errors import BackendError, ConfigError, DomainError

log = logging.getLogger(__name__)

ROLES = ("system", "user", "assistant")


@dataclass(frozen=True)
class ChatMessage:
    role: str
    content: str

    def __post_init__(self) -> None:
        if self.role not in ROLES:
            raise DomainError(f"unknown chat role {self.role!r}")
        if self.role in ("system", "user") and not self.content:
            raise DomainError(f"{self.role} message content must be non-empty")

    def to_dict(self) -> dict:
        return {"role": self.role, "content": self.content}


@dataclass(frozen=True)
class BackendConfig:
    base_url: str = "http://localhost:11434"
    model_name: str = "llama3.3:70b-instruct-q4_0"
    temperature: float = 0.7
    timeout: float = 120.0
    max_retries: int = 3
    api_key: str | None = field(default=None, repr=False)
    backoff: float = 1.0

    def __post_init__(self) -> None:
        if self.temperature < 0:
            raise ConfigError("temperature must be >= 0")
        if self.max_retries < 0:
            raise ConfigError("max_retries must be >= 0")
        if self.timeout <= 0:
            raise ConfigError("timeout must be positive")


@dataclass(frozen=True)
class RequestContext:
    """Who is asking and why; scripted backends key their replies on this."""

    kind: str = "chat"
    agent: str | None = None
    role: str | None = None
    round: int | None = None
    debate_id: str | None = None
    sample_id: str | None = None
    run: int | None = None
    attempt: int = 0
    extra: Mapping[str, Any] = field(default_factory=dict)

    def get(self, key: str, default: Any = None) -> Any:
        if key in self.extra:
            return self.extra[key]
        return getattr(self, key, default)

    def rng(self, seed: int | str = 0) -> random.Random:
        """A generator determined by ``seed`` and this context only."""
        key = f"{seed}|{self.debate_id}|{self.agent}|{self.round}|{self.kind}|{self.attempt}"
        for k in sorted(self.extra):
            key += f"|{k}={self.extra[k]}"
        return random.Random(key)


class Backend(Protocol):
    def complete(self, messages: Sequence[ChatMessage], context: RequestContext | None = None) -> str: ...


def check_messages(messages: Sequence[ChatMessage]) -> None:
    if not messages:
        raise DomainError("at least one chat message is required")
    for i, m in enumerate(messages):
        if m.role == "system" and i != 0:
            raise DomainError("a system message may only appear first")


class HTTPBackend:
    """OpenAI-style ``/v1/chat/completions`` client with bounded retries.

    Transport failures and 5xx responses are retried with exponential
    backoff; 4xx responses fail immediately.
    """

    def __init__(
        self,
        config: BackendConfig,
        client: httpx.Client | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.config = config
        self._client = client or httpx.Client(timeout=config.timeout)
        self._sleep = sleep

    @property
    def url(self) -> str:
        return self.config.base_url.rstrip("/") + "/v1/chat/completions"

    def payload(self, messages: Sequence[ChatMessage]) -> dict:
        return {
            "model": self.config.model_name,
            "messages": [m.to_dict() for m in messages],
            "temperature": self.config.temperature,
        }

    def complete(self, messages: Sequence[ChatMessage], context: RequestContext | None = None) -> str:
        check_messages(messages)
        headers = {"Content-Type": "application/json"}
        if self.config.api_key:
            headers["Authorization"] = f"Bearer {self.config.api_key}"
        body = self.payload(messages)
        last_error = "no attempt made"
        for attempt in range(self.config.max_retries + 1):
            if attempt:
                delay = self.config.backoff * 2 ** (attempt - 1)
                log.warning("retrying chat completion in %.2fs (%s)", delay, last_error)
                self._sleep(delay)
            try:
                resp = self._client.post(self.url, json=body, headers=headers, timeout=self.config.timeout)
            except httpx.TransportError as exc:
                last_error = f"transport error: {exc!r}"
                continue
            if resp.status_code >= 500:
                last_error = f"HTTP {resp.status_code}"
                continue
            if resp.status_code >= 400:
                raise BackendError(f"HTTP {resp.status_code} from {self.url}: {resp.text[:200]}")
            try:
                content = resp.json()["choices"][0]["message"]["content"]
            except (ValueError, KeyError, IndexError, TypeError) as exc:
                raise BackendError(f"malformed completion response: {exc!r}") from exc
            if not isinstance(content, str):
                raise BackendError(f"completion content is not text: {content!r}")
            return content
        raise BackendError(f"gave up after {self.config.max_retries + 1} attempts: {last_error}")

    def close(self) -> None:
        self._client.close()


@dataclass
class RequestRecord:
    context: RequestContext
    messages: tuple[ChatMessage, ...]
    response: str


Script = Callable[[RequestContext, Sequence[ChatMessage]], str]


class ScriptedBackend:
    """Deterministic backend replaying canned responses.

    ``script`` may be
      * a list of strings, consumed in order by every caller;
      * a dict mapping agent name to its own list (per-agent queues);
      * a callable ``f(context, messages) -> str``.

    Every request is appended to :attr:`requests`.
    """

    def __init__(self, script: Sequence[str] | Mapping[str, Sequence[str]] | Script):
        self._lock = threading.Lock()
        self.requests: list[RequestRecord] = []
        self._fn: Script | None = None
        self._queue: list[str] | None = None
        self._queues: dict[str, list[str]] | None = None
        if callable(script):
            self._fn = script
        elif isinstance(script, Mapping):
            self._queues = {k: list(v) for k, v in script.items()}
        elif isinstance(script, (list, tuple)):
            self._queue = list(script)
        else:
            raise ConfigError(f"unsupported script type {type(script).__name__}")

    def complete(self, messages: Sequence[ChatMessage], context: RequestContext | None = None) -> str:
        check_messages(messages)
        ctx = context or RequestContext()
        with self._lock:
            if self._fn is not None:
                response = self._fn(ctx, messages)
            elif self._queues is not None:
                queue = self._queues.get(ctx.agent or "")
                if not queue:
                    raise BackendError(f"scripted queue for agent {ctx.agent!r} is exhausted")
                response = queue.pop(0)
            else:
                if not self._queue:
                    raise BackendError("scripted response queue is exhausted")
                response = self._queue.pop(0)
            if not isinstance(response, str):
                raise BackendError(f"script produced a non-string response: {response!r}")
            self.requests.append(RequestRecord(ctx, tuple(messages), response))
        return response


def _matches(rule_match: Mapping[str, Any], ctx: RequestContext) -> bool:
    for key, expected in rule_match.items():
        actual = ctx.get(key)
        if isinstance(expected, list):
            if actual not in expected:
                return False
        elif actual != expected:
            return False
    return True


def rules_script(spec: Mapping[str, Any]) -> Script:
    """Build a script function from a declarative rule table.

    ``spec`` looks like::

        {"rules": [{"match": {"kind": "reassess", "role": "target"},
                    "by_round": ["5", "4", "3", "2"]},
                   {"match": {"kind": "speak"}, "response": "I hold my view. (A)"}],
         "default": "3"}

    The first rule whose ``match`` entries all equal the request context
    fields (list values mean membership) supplies the response. ``by_round``
    is indexed by ``round - 1`` and repeats its last entry past the end.
    """
    rules = list(spec.get("rules", []))
    default = spec.get("default")
    for i, rule in enumerate(rules):
        if "response" not in rule and "by_round" not in rule:
            raise ConfigError(f"script rule {i} needs 'response' or 'by_round'")

    def script(ctx: RequestContext, messages: Sequence[ChatMessage]) -> str:
        for rule in rules:
            if _matches(rule.get("match", {}), ctx):
                if "by_round" in rule:
                    seq = rule["by_round"]
                    idx = max(0, min((ctx.round or 1) - 1, len(seq) - 1))
                    return seq[idx]
                return rule["response"]
        if default is None:
            raise BackendError(f"no script rule matches {ctx}")
        return default

    return script


def load_script(path: str | Path) -> ScriptedBackend:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"script file not found: {p}")
    try:
        spec = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{p}: invalid JSON: {exc}") from exc
    if isinstance(spec, list):
        return ScriptedBackend(spec)
    if not isinstance(spec, dict):
        raise ConfigError(f"{p}: script must be a JSON object or array")
    return ScriptedBackend(rules_script(spec))
