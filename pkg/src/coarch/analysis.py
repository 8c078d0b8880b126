"""Architectural analysis: bot-proposed ASRs and architect refinements.

The analysis engine turns a validated story into Proposed ASRs through
the conversational backend, lets the architect refine them with
add/remove/update operations, lints the live list for vagueness, and
promotes requirements to Accepted. All functions here are pure; they
return updated tuples plus the provenance events the store must append.
"""

from __future__ import annotations

import dataclasses
import re
from dataclasses import dataclass
from enum import Enum
from typing import Any, Mapping, Sequence

from .backends import ChatBackend
from .errors import (
    InvalidPayload,
    InvariantViolation,
    PreconditionFailed,
    SchemaViolation,
    UnknownAsr,
    UnparseableResponse,
)
from .gateway import Activity, Clock, SessionTranscript, send_turn
from .model import (
    ArchitectureStory,
    ArtifactKind,
    ArtifactRef,
    Asr,
    AsrKind,
    AsrStatus,
    Comparator,
    Origin,
    ProvenanceEvent,
    QuantifiedCriterion,
    new_asr_id,
    validate_story,
)
from .prompts import PromptRegistry, render_prompt

# Terms the architect must replace with measurable thresholds.
DEFAULT_VAGUE_TERMS = ("instantly", "securely", "fast", "scalable", "user-friendly")

_PAYLOAD_FIELDS = frozenset({"kind", "statement", "criterion", "tags"})
_ASR_BLOCK_RE = re.compile(r"```asr[ \t]*\n(.*?)```", re.DOTALL)
_METRIC_RE = re.compile(r"[a-z][a-z0-9_]*")


class RefinementKind(str, Enum):
    ADD = "add"
    REMOVE = "remove"
    UPDATE = "update"


@dataclass(frozen=True)
class RefinementOp:
    """One architect edit: add a requirement, or update/remove by id."""

    op: RefinementKind
    target: str | None = None
    payload: Mapping[str, Any] = dataclasses.field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "payload", dict(self.payload))
        if self.op is RefinementKind.ADD and self.target is not None:
            raise InvalidPayload("an add operation must not name a target")
        if self.op is not RefinementKind.ADD and self.target is None:
            raise InvalidPayload(f"a {self.op.value} operation requires a target")

    def to_dict(self) -> dict[str, Any]:
        return {"op": self.op.value, "target": self.target, "payload": dict(self.payload)}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "RefinementOp":
        op_value = data.get("op")
        try:
            op = RefinementKind(op_value)
        except ValueError:
            raise SchemaViolation(f"RefinementOp: unknown op {op_value!r}") from None
        target = data.get("target")
        if target is not None and not isinstance(target, str):
            raise SchemaViolation("RefinementOp: target must be a string")
        payload = data.get("payload", {})
        if not isinstance(payload, Mapping):
            raise SchemaViolation("RefinementOp: payload must be an object")
        return cls(op=op, target=target, payload=payload)


class LintCode(str, Enum):
    UNQUANTIFIED_QUALITY = "unquantified_quality"
    VAGUE_TERM = "vague_term"
    MISSING_CONSTRAINT_TAG = "missing_constraint_tag"
    EMPTY_STATEMENT = "empty_statement"


@dataclass(frozen=True)
class LintFinding:
    asr_id: str
    code: LintCode
    detail: str
    triggering_term: str | None = None

    def __post_init__(self) -> None:
        if self.code is LintCode.VAGUE_TERM and not self.triggering_term:
            raise ValueError("a vague-term finding must name the term")

    def to_dict(self) -> dict[str, Any]:
        return {
            "asr_id": self.asr_id,
            "code": self.code.value,
            "detail": self.detail,
            "triggering_term": self.triggering_term,
        }


@dataclass(frozen=True)
class ExtractionResult:
    asrs: tuple[Asr, ...]
    transcript: SessionTranscript
    events: tuple[ProvenanceEvent, ...]


def parse_asr_block(text: str, existing: Sequence[Asr] = ()) -> tuple[Asr, ...]:
    """Parse the bot's fenced asr block into Proposed requirements.

    Ids continue the numbering of `existing` so re-analysis can merge
    new proposals without collisions.
    """

    blocks = _ASR_BLOCK_RE.findall(text)
    if len(blocks) != 1:
        raise UnparseableResponse(
            f"expected exactly one fenced asr block, found {len(blocks)}"
        )
    taken = list(existing)
    parsed = []
    for raw_line in blocks[0].splitlines():
        line = raw_line.strip()
        if not line:
            continue
        parts = [part.strip() for part in line.split("|")]
        if len(parts) not in (2, 3):
            raise UnparseableResponse(f"malformed asr record: {line!r}")
        try:
            kind = AsrKind[parts[0].upper()]
        except KeyError:
            raise UnparseableResponse(f"unknown asr kind: {parts[0]!r}") from None
        if not parts[1]:
            raise UnparseableResponse(f"empty statement in record: {line!r}")
        criterion = _parse_criterion(parts[2], line) if len(parts) == 3 else None
        asr = Asr(
            id=new_asr_id(a.id for a in taken),
            kind=kind,
            statement=parts[1],
            criterion=criterion,
            status=AsrStatus.PROPOSED,
        )
        taken.append(asr)
        parsed.append(asr)
    return tuple(parsed)


def _parse_criterion(text: str, line: str) -> QuantifiedCriterion:
    tokens = text.split()
    if len(tokens) != 3:
        raise UnparseableResponse(f"criterion must be 'metric comparator value': {line!r}")
    metric, comparator_token, value_token = tokens
    if not _METRIC_RE.fullmatch(metric):
        raise UnparseableResponse(f"bad criterion metric in record: {line!r}")
    try:
        comparator = Comparator[comparator_token.upper()]
    except KeyError:
        raise UnparseableResponse(f"bad comparator in record: {line!r}") from None
    try:
        value = float(value_token)
    except ValueError:
        raise UnparseableResponse(f"bad criterion value in record: {line!r}") from None
    try:
        return QuantifiedCriterion(metric=metric, comparator=comparator, value=value)
    except ValueError as exc:
        raise UnparseableResponse(f"{exc}: {line!r}") from None


def extract_asrs(
    story: ArchitectureStory,
    transcript: SessionTranscript,
    backend: ChatBackend,
    clock: Clock,
    registry: PromptRegistry,
    existing: Sequence[Asr] = (),
) -> ExtractionResult:
    """Ask the bot for ASRs and parse them, re-asking once on failure."""

    defects = validate_story(story)
    if defects:
        raise PreconditionFailed(
            "story fails validation",
            detail={"defects": [d.to_dict() for d in defects]},
        )
    prompt = render_prompt(registry.get("analysis"), {"story": story_block(story)})
    bot, transcript = send_turn(
        transcript, prompt, Activity.ANALYSIS, backend, clock, registry=registry
    )
    try:
        asrs = parse_asr_block(bot.content, existing)
    except UnparseableResponse as exc:
        repair = render_prompt(registry.get("analysis_repair"), {"error": exc.message})
        bot, transcript = send_turn(
            transcript, repair, Activity.ANALYSIS, backend, clock, registry=registry
        )
        asrs = parse_asr_block(bot.content, existing)
    turn_ref = f"{transcript.session_id}#{bot.id}"
    events = tuple(
        ProvenanceEvent(
            artifact_ref=ArtifactRef(kind=ArtifactKind.ASR, id=asr.id),
            origin=Origin.BOT,
            turn_ref=turn_ref,
        )
        for asr in asrs
    )
    return ExtractionResult(asrs=asrs, transcript=transcript, events=events)


def asr_lines(asrs: Sequence[Asr]) -> str:
    """One prompt line per requirement: id, kind, statement."""

    if not asrs:
        return "(none)"
    return "\n".join(f"{a.id} [{a.kind.value}] {a.statement}" for a in asrs)


def story_block(story: ArchitectureStory) -> str:
    """Render a story for prompt embedding: narrative, scenarios, tags."""

    lines = [story.narrative.strip()]
    for sketch in story.scenarios:
        entry = f"Scenario: {sketch.title}"
        if sketch.description:
            entry += f" - {sketch.description}"
        lines.append(entry)
    if story.domain_tags:
        lines.append("Domain: " + ", ".join(story.domain_tags))
    return "\n".join(lines)


def apply_refinement(
    asrs: Sequence[Asr],
    op: RefinementOp,
    origin: Origin,
    *,
    turn_ref: str | None = None,
) -> tuple[tuple[Asr, ...], ProvenanceEvent]:
    """Apply one refinement, returning the new list and its provenance.

    Removals are tombstones: the requirement flips to Rejected and keeps
    its id forever. Any operation aimed at a tombstone is rejected.
    """

    unknown = set(op.payload) - _PAYLOAD_FIELDS
    if unknown:
        raise InvalidPayload(f"unknown payload fields: {sorted(unknown)}")
    if op.op is RefinementKind.ADD:
        updated, touched = _apply_add(asrs, op.payload)
    elif op.op is RefinementKind.UPDATE:
        updated, touched = _apply_update(asrs, op.target, op.payload)
    else:
        updated, touched = _apply_remove(asrs, op.target, op.payload)
    event = ProvenanceEvent(
        artifact_ref=ArtifactRef(kind=ArtifactKind.ASR, id=touched),
        origin=origin,
        turn_ref=turn_ref,
    )
    return updated, event


def _apply_add(
    asrs: Sequence[Asr], payload: Mapping[str, Any]
) -> tuple[tuple[Asr, ...], str]:
    if "kind" not in payload or "statement" not in payload:
        raise InvalidPayload("add requires kind and statement")
    asr = Asr(
        id=new_asr_id(a.id for a in asrs),
        kind=_decode_kind(payload["kind"]),
        statement=_decode_statement(payload["statement"]),
        criterion=_decode_criterion(payload.get("criterion")),
        tags=_decode_tags(payload.get("tags", ())),
        status=AsrStatus.REFINED,
    )
    return (*asrs, asr), asr.id


def _apply_update(
    asrs: Sequence[Asr], target: str, payload: Mapping[str, Any]
) -> tuple[tuple[Asr, ...], str]:
    current = _find(asrs, target)
    if current.status is AsrStatus.REJECTED:
        raise InvalidPayload(f"{target} is rejected and can no longer change")
    if not payload:
        raise InvalidPayload("update requires at least one payload field")
    changed = Asr(
        id=current.id,
        kind=_decode_kind(payload["kind"]) if "kind" in payload else current.kind,
        statement=(
            _decode_statement(payload["statement"])
            if "statement" in payload
            else current.statement
        ),
        criterion=(
            _decode_criterion(payload["criterion"])
            if "criterion" in payload
            else current.criterion
        ),
        tags=_decode_tags(payload["tags"]) if "tags" in payload else current.tags,
        status=AsrStatus.REFINED,
    )
    return tuple(changed if a.id == target else a for a in asrs), target


def _apply_remove(
    asrs: Sequence[Asr], target: str, payload: Mapping[str, Any]
) -> tuple[tuple[Asr, ...], str]:
    if payload:
        raise InvalidPayload("remove takes no payload")
    current = _find(asrs, target)
    if current.status is AsrStatus.REJECTED:
        raise InvalidPayload(f"{target} is already rejected")
    tombstone = dataclasses.replace(current, status=AsrStatus.REJECTED)
    return tuple(tombstone if a.id == target else a for a in asrs), target


def _find(asrs: Sequence[Asr], asr_id: str) -> Asr:
    for asr in asrs:
        if asr.id == asr_id:
            return asr
    raise UnknownAsr(asr_id)


def _decode_kind(value: Any) -> AsrKind:
    try:
        return AsrKind(value)
    except ValueError:
        raise InvalidPayload(f"unknown kind {value!r}") from None


def _decode_statement(value: Any) -> str:
    if not isinstance(value, str) or not value.strip():
        raise InvalidPayload("statement must be a non-empty string")
    return value


def _decode_criterion(value: Any) -> QuantifiedCriterion | None:
    if value is None:
        return None
    if not isinstance(value, Mapping):
        raise InvalidPayload("criterion must be an object or null")
    try:
        return QuantifiedCriterion.from_dict(value)
    except SchemaViolation as exc:
        raise InvalidPayload(exc.message) from None


def _decode_tags(value: Any) -> tuple[str, ...]:
    if not isinstance(value, Sequence) or isinstance(value, (str, bytes)):
        raise InvalidPayload("tags must be a list of strings")
    tags = []
    for tag in value:
        if not isinstance(tag, str) or not tag.strip():
            raise InvalidPayload("tags must be a list of strings")
        tags.append(tag)
    return tuple(tags)


def accept_asrs(asrs: Sequence[Asr], ids: Sequence[str]) -> tuple[Asr, ...]:
    """Promote the named requirements to Accepted, atomically.

    Every id is validated before any status changes, so a bad id in the
    batch leaves the list untouched.
    """

    for asr_id in ids:
        candidate = _find(asrs, asr_id)
        if candidate.status is AsrStatus.REJECTED:
            raise InvariantViolation(asr_id, "a rejected requirement cannot be accepted")
        if candidate.kind is AsrKind.QUALITY and candidate.criterion is None:
            raise InvariantViolation(asr_id, "a quality requirement needs a criterion")
    wanted = set(ids)
    return tuple(
        dataclasses.replace(a, status=AsrStatus.ACCEPTED) if a.id in wanted else a
        for a in asrs
    )


def lint_asrs(
    asrs: Sequence[Asr], *, vague_terms: Sequence[str] = DEFAULT_VAGUE_TERMS
) -> tuple[LintFinding, ...]:
    """Lint live requirements for vagueness and missing structure.

    Rejected tombstones are skipped. Findings are sorted by asr id,
    code, then term, so identical input yields identical output
    regardless of list order.
    """

    patterns = [
        (term, re.compile(rf"\b{re.escape(term)}\b", re.IGNORECASE))
        for term in vague_terms
    ]
    findings = []
    for asr in asrs:
        if asr.status is AsrStatus.REJECTED:
            continue
        if not asr.statement.strip():
            findings.append(
                LintFinding(asr.id, LintCode.EMPTY_STATEMENT, "statement is empty")
            )
        if (
            asr.kind is AsrKind.QUALITY
            and asr.status in (AsrStatus.ACCEPTED, AsrStatus.REFINED)
            and asr.criterion is None
        ):
            findings.append(
                LintFinding(
                    asr.id,
                    LintCode.UNQUANTIFIED_QUALITY,
                    "quality requirement lacks a quantified criterion",
                )
            )
        if asr.kind is AsrKind.CONSTRAINT and not asr.tags:
            findings.append(
                LintFinding(
                    asr.id,
                    LintCode.MISSING_CONSTRAINT_TAG,
                    "constraint carries no tags",
                )
            )
        for term, pattern in patterns:
            if pattern.search(asr.statement):
                findings.append(
                    LintFinding(
                        asr.id,
                        LintCode.VAGUE_TERM,
                        f"vague term '{term}' needs a measurable restatement",
                        triggering_term=term,
                    )
                )
    findings.sort(key=lambda f: (f.asr_id, f.code.value, f.triggering_term or ""))
    return tuple(findings)
