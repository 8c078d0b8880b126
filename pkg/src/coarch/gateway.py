"""Context-preserved conversations with a pluggable backend.

A session transcript is an ordered list of turns whose roles alternate
Architect/Bot (System turns may only lead the conversation). Transcripts
serialize to JSON-lines fixtures: one header line, then one turn per line.
Replaying a fixture against the same architect inputs reproduces the bot
turns byte-for-byte, which is what makes the whole pipeline testable
offline.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, replace
from datetime import datetime, timedelta, timezone
from enum import Enum
from typing import Any, Mapping, Protocol, Sequence

from coarch.backends import ChatBackend, ChatMessage, Exchange, ReplayBackend
from coarch.errors import AlternationViolation, ContextTooLarge, CorruptFixture
from coarch.model import SCHEMA_VERSION, canonical_json
from coarch.prompts import PromptRegistry, render_prompt

# Number of trailing turns kept verbatim when the context is summarized.
SUMMARY_KEEP_TURNS = 6
SUMMARY_MARKER = "[summary]"

TICK_EPOCH = "2024-01-01T00:00:00+00:00"


class Role(str, Enum):
    ARCHITECT = "architect"
    BOT = "bot"
    SYSTEM = "system"


class Activity(str, Enum):
    STORY_FEED = "story_feed"
    ANALYSIS = "analysis"
    SYNTHESIS = "synthesis"
    EVALUATION = "evaluation"
    FREEFORM = "freeform"


class Clock(Protocol):
    def now(self) -> str:
        """ISO-8601 UTC timestamp."""
        ...


class SystemClock:
    def now(self) -> str:
        return datetime.now(timezone.utc).isoformat(timespec="seconds")


class TickClock:
    """Deterministic clock: epoch plus one second per call.

    Replay sessions use tick clocks so that re-running a fixture produces
    byte-identical transcripts and ledgers. ``ticks`` seeds the counter when
    resuming a persisted session.
    """

    def __init__(self, epoch: str = TICK_EPOCH, ticks: int = 0) -> None:
        self._epoch = datetime.fromisoformat(epoch)
        self.ticks = ticks

    def now(self) -> str:
        stamp = self._epoch + timedelta(seconds=self.ticks)
        self.ticks += 1
        return stamp.isoformat(timespec="seconds")


@dataclass(frozen=True)
class Turn:
    id: int
    role: Role
    content: str
    activity: Activity
    created_at: str

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "role": self.role.value,
            "content": self.content,
            "activity": self.activity.value,
            "created_at": self.created_at,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Turn":
        turn_id = data.get("id")
        if not isinstance(turn_id, int) or isinstance(turn_id, bool):
            raise CorruptFixture("turn id must be an integer")
        try:
            return cls(
                id=turn_id,
                role=Role(data.get("role")),
                content=str(data.get("content", "")),
                activity=Activity(data.get("activity")),
                created_at=str(data.get("created_at", "")),
            )
        except ValueError as exc:
            raise CorruptFixture(f"bad turn field: {exc}") from exc


@dataclass(frozen=True)
class SessionTranscript:
    session_id: str
    turns: tuple[Turn, ...] = ()
    backend_descriptor: str = ""

    def last_turn(self) -> Turn | None:
        return self.turns[-1] if self.turns else None

    def next_turn_id(self) -> int:
        return self.turns[-1].id + 1 if self.turns else 1

    def bot_turn_count(self) -> int:
        return sum(1 for t in self.turns if t.role is Role.BOT)


def validate_alternation(turns: Sequence[Turn]) -> None:
    """Raise unless roles alternate Architect/Bot with System only leading."""
    previous_id = 0
    expected = Role.ARCHITECT
    seen_dialog = False
    for turn in turns:
        if turn.id <= previous_id:
            raise AlternationViolation(
                f"turn ids must strictly increase (saw {turn.id} after {previous_id})"
            )
        previous_id = turn.id
        if turn.role is Role.SYSTEM:
            if seen_dialog:
                raise AlternationViolation(
                    "system turns may appear only before the first architect turn"
                )
            continue
        seen_dialog = True
        if turn.role is not expected:
            raise AlternationViolation(
                f"expected {expected.value} turn, found {turn.role.value} "
                f"(turn {turn.id})"
            )
        expected = Role.BOT if expected is Role.ARCHITECT else Role.ARCHITECT


def to_messages(turns: Sequence[Turn]) -> list[ChatMessage]:
    role_map = {Role.SYSTEM: "system", Role.ARCHITECT: "user", Role.BOT: "assistant"}
    return [ChatMessage(role=role_map[t.role], content=t.content) for t in turns]


def send_turn(
    transcript: SessionTranscript,
    content: str,
    activity: Activity,
    backend: ChatBackend,
    clock: Clock,
    *,
    registry: PromptRegistry | None = None,
) -> tuple[Turn, SessionTranscript]:
    """Append one architect turn and exactly one bot turn.

    The full prior transcript is handed to the backend as context. On
    ContextTooLarge the transcript is summarized once (all but the last
    SUMMARY_KEEP_TURNS turns collapse into one System summary turn) and the
    send is retried; summarization uses the same backend.
    """
    validate_alternation(transcript.turns)
    last = transcript.last_turn()
    if last is not None and last.role is Role.ARCHITECT:
        raise AlternationViolation(
            "cannot send: the transcript already ends with an architect turn"
        )
    architect_turn = Turn(
        id=transcript.next_turn_id(),
        role=Role.ARCHITECT,
        content=content,
        activity=activity,
        created_at=clock.now(),
    )
    working = transcript
    try:
        response = backend.complete(to_messages(working.turns + (architect_turn,)))
    except ContextTooLarge:
        if registry is None:
            raise
        working = summarize_transcript(working, backend, clock, registry)
        response = backend.complete(to_messages(working.turns + (architect_turn,)))
    bot_turn = Turn(
        id=architect_turn.id + 1,
        role=Role.BOT,
        content=response,
        activity=activity,
        created_at=clock.now(),
    )
    updated = replace(working, turns=working.turns + (architect_turn, bot_turn))
    return bot_turn, updated


def summarize_transcript(
    transcript: SessionTranscript,
    backend: ChatBackend,
    clock: Clock,
    registry: PromptRegistry,
) -> SessionTranscript:
    """Collapse all but the trailing turns into one System summary turn."""
    turns = transcript.turns
    if len(turns) <= SUMMARY_KEEP_TURNS:
        raise ContextTooLarge(
            "context rejected by backend and transcript is too short to summarize"
        )
    suffix = turns[-SUMMARY_KEEP_TURNS:]
    dropped = turns[:-SUMMARY_KEEP_TURNS]
    conversation = "\n".join(f"{t.role.value}: {t.content}" for t in dropped)
    prompt = render_prompt(registry.get("summarize"), {"conversation": conversation})
    summary = backend.complete([ChatMessage(role="user", content=prompt)])
    summary_turn = Turn(
        id=suffix[0].id - 1,
        role=Role.SYSTEM,
        content=f"{SUMMARY_MARKER} {summary}",
        activity=Activity.FREEFORM,
        created_at=clock.now(),
    )
    summarized = replace(transcript, turns=(summary_turn,) + suffix)
    validate_alternation(summarized.turns)
    return summarized


# ---------------------------------------------------------------------------
# Record / replay fixtures


def record(transcript: SessionTranscript, prompt_registry_hash: str) -> bytes:
    """Serialize a transcript to fixture bytes (header line + turn lines)."""
    header = {
        "schema_version": SCHEMA_VERSION,
        "session_id": transcript.session_id,
        "backend_descriptor": transcript.backend_descriptor,
        "prompt_registry_hash": prompt_registry_hash,
    }
    lines = [canonical_json(header)]
    lines.extend(canonical_json(turn.to_dict()) for turn in transcript.turns)
    return ("\n".join(lines) + "\n").encode("utf-8")


@dataclass(frozen=True)
class RecordedSession:
    session_id: str
    backend_descriptor: str
    prompt_registry_hash: str
    turns: tuple[Turn, ...]

    def exchanges(self) -> list[Exchange]:
        """Architect/bot pairs, in order; system turns carry no exchange."""
        pairs: list[Exchange] = []
        pending: Turn | None = None
        for turn in self.turns:
            if turn.role is Role.ARCHITECT:
                pending = turn
            elif turn.role is Role.BOT and pending is not None:
                pairs.append(
                    Exchange(turn_id=pending.id, architect=pending.content, bot=turn.content)
                )
                pending = None
        return pairs


def load_fixture(data: bytes) -> RecordedSession:
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise CorruptFixture(f"fixture is not UTF-8: {exc}") from exc
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines:
        raise CorruptFixture("fixture is empty (missing header line)")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise CorruptFixture(f"fixture header is not JSON: {exc}") from exc
    if not isinstance(header, dict) or header.get("schema_version") != SCHEMA_VERSION:
        raise CorruptFixture("fixture header lacks a supported schema_version")
    turns: list[Turn] = []
    for index, line in enumerate(lines[1:], start=2):
        try:
            raw = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorruptFixture(f"fixture line {index} is not JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise CorruptFixture(f"fixture line {index} is not an object")
        turns.append(Turn.from_dict(raw))
    try:
        validate_alternation(turns)
    except AlternationViolation as exc:
        raise CorruptFixture(f"fixture transcript is malformed: {exc}") from exc
    return RecordedSession(
        session_id=str(header.get("session_id", "")),
        backend_descriptor=str(header.get("backend_descriptor", "")),
        prompt_registry_hash=str(header.get("prompt_registry_hash", "")),
        turns=tuple(turns),
    )


def replay(data: bytes, name: str = "fixture", *, cursor: int = 0) -> ReplayBackend:
    """Build a backend that replays the recorded session from ``cursor``."""
    recorded = load_fixture(data)
    return ReplayBackend(
        recorded.exchanges(), descriptor=f"replay:{name}", cursor=cursor
    )


def merge_sessions(
    session_id: str,
    sessions: Sequence[RecordedSession],
    *,
    backend_descriptor: str = "scripted",
) -> SessionTranscript:
    """Concatenate recorded sessions into one transcript, renumbering turns.

    Fixture authoring records each activity as its own session; replaying a
    whole architecting run from a single fixture needs them joined back up.
    """
    turns: list[Turn] = []
    for recorded in sessions:
        for turn in recorded.turns:
            turns.append(replace(turn, id=len(turns) + 1))
    return SessionTranscript(
        session_id=session_id,
        turns=tuple(turns),
        backend_descriptor=backend_descriptor,
    )


# ---------------------------------------------------------------------------
# Response-variation probe


def normalize_response(text: str) -> str:
    """Lowercase and collapse whitespace; no stemming."""
    return " ".join(text.lower().split())


@dataclass(frozen=True)
class VarianceReport:
    prompt_hash: str
    samples: tuple[str, ...]
    n: int
    distinct_normalized: int
    divergence: float

    def __post_init__(self) -> None:
        if not 0 <= self.distinct_normalized <= self.n:
            raise ValueError("distinct_normalized out of range")
        expected = (self.distinct_normalized - 1) / max(1, self.n - 1)
        if abs(self.divergence - expected) > 1e-12:
            raise ValueError("divergence does not match its formula")

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "prompt_hash": self.prompt_hash,
            "samples": list(self.samples),
            "n": self.n,
            "distinct_normalized": self.distinct_normalized,
            "divergence": self.divergence,
        }


def variance_probe(prompt: str, n: int, backend: ChatBackend) -> VarianceReport:
    """Sample ``n`` independent single-shot completions of one prompt.

    Each request carries no shared context. Responses are normalized before
    the distinct count, so formatting-only differences do not register as
    variation.
    """
    if n < 1:
        raise ValueError("variance probe needs n >= 1")
    samples = [backend.complete([ChatMessage(role="user", content=prompt)]) for _ in range(n)]
    distinct = len({normalize_response(s) for s in samples})
    return VarianceReport(
        prompt_hash=hashlib.sha256(prompt.encode("utf-8")).hexdigest(),
        samples=tuple(samples),
        n=n,
        distinct_normalized=distinct,
        divergence=(distinct - 1) / max(1, n - 1),
    )
