"""Error registry: every engine failure carries a stable code.

The ``code`` strings form the documented error registry (docs/api/errors.md);
the CLI prints them as JSON on stderr and the HTTP service maps them onto
status codes. Codes are stable identifiers, messages are for humans.
"""

from __future__ import annotations

from typing import Any, ClassVar


class CoarchError(Exception):
    """Catch-all failure; subclasses refine the code, status, and exit code."""

    code: ClassVar[str] = "internal_error"
    http_status: ClassVar[int] = 500
    exit_code: ClassVar[int] = 1

    def __init__(self, message: str, *, detail: dict[str, Any] | None = None) -> None:
        super().__init__(message)
        self.message = message
        self.detail = detail or {}

    def as_payload(self) -> dict[str, Any]:
        payload: dict[str, Any] = {"code": self.code, "message": self.message}
        if self.detail:
            payload["detail"] = self.detail
        return payload


class SchemaViolation(CoarchError):
    """A serialized payload does not match its published schema."""

    code = "schema_violation"
    http_status = 400
    exit_code = 1


class UsageError(CoarchError):
    """Malformed command-line invocation."""

    code = "usage_error"
    http_status = 400
    exit_code = 2


class UnknownProject(CoarchError):
    """No project exists at the addressed directory or id."""

    code = "unknown_project"
    http_status = 404


class UnknownArtifact(CoarchError):
    """The addressed artifact (model revision, report) does not exist."""

    code = "unknown_artifact"
    http_status = 404

    def __init__(self, kind: str, artifact_id: str) -> None:
        super().__init__(
            f"no {kind} named {artifact_id!r}",
            detail={"kind": kind, "id": artifact_id},
        )


class UnknownAsr(CoarchError):
    """A requirement id resolves to nothing in this project."""

    code = "unknown_asr"
    http_status = 404

    def __init__(self, asr_id: str) -> None:
        super().__init__(f"no such ASR: {asr_id}", detail={"asr_id": asr_id})
        self.asr_id = asr_id


class UnknownElement(CoarchError):
    """A model element name resolves to nothing in the current model."""

    code = "unknown_element"
    http_status = 404

    def __init__(self, name: str) -> None:
        super().__init__(f"no such model element: {name}", detail={"element": name})
        self.element = name


class InvalidPayload(CoarchError):
    """A refinement op payload is malformed or not applicable."""

    code = "invalid_payload"
    http_status = 400


class InvariantViolation(CoarchError):
    """Applying an operation would break a domain invariant."""

    code = "invariant_violation"
    http_status = 409

    def __init__(self, asr_id: str, reason: str) -> None:
        super().__init__(
            f"{asr_id}: {reason}", detail={"asr_id": asr_id, "reason": reason}
        )
        self.asr_id = asr_id
        self.reason = reason


class PreconditionFailed(CoarchError):
    """An operation was invoked outside its stated precondition."""

    code = "precondition_failed"
    http_status = 409
    exit_code = 2


class BackendUnavailable(CoarchError):
    """The conversational backend cannot be reached; retryable."""

    code = "backend_unavailable"
    http_status = 502
    exit_code = 3


class ContextTooLarge(CoarchError):
    """The backend rejected the conversation context; caller must summarize."""

    code = "context_too_large"
    http_status = 502
    exit_code = 3


class ReplayExhausted(CoarchError):
    """The replay fixture has no next recorded response."""

    code = "replay_exhausted"
    http_status = 502
    exit_code = 3


class InputMismatch(CoarchError):
    """Replay input diverged from the recorded architect turn."""

    code = "input_mismatch"
    http_status = 409
    exit_code = 3

    def __init__(self, turn_id: int, expected: str, got: str) -> None:
        super().__init__(
            f"replay diverged at turn {turn_id}",
            detail={"turn_id": turn_id, "expected": expected, "got": got},
        )
        self.turn_id = turn_id


class CorruptFixture(CoarchError):
    """A replay fixture file is damaged or has a foreign header."""

    code = "corrupt_fixture"
    http_status = 400
    exit_code = 3


class MissingPlaceholder(CoarchError):
    """A prompt template placeholder was left unbound."""

    code = "missing_placeholder"
    http_status = 400

    def __init__(self, name: str) -> None:
        super().__init__(f"unbound placeholder: {name}", detail={"placeholder": name})
        self.placeholder = name


class AlternationViolation(CoarchError):
    """Transcript roles must alternate Architect/Bot."""

    code = "alternation_violation"
    http_status = 409


class UnparseableResponse(CoarchError):
    """The bot's reply violated the structured-output contract twice."""

    code = "unparseable_response"
    http_status = 502


class UnparseableScript(CoarchError):
    """The bot's diagram script failed to parse, twice."""

    code = "unparseable_script"
    http_status = 502


class UmlSyntaxError(CoarchError):
    """Diagram script violates the published grammar."""

    code = "syntax_error"
    http_status = 400

    def __init__(self, line: int, expected: str) -> None:
        super().__init__(
            f"line {line}: expected {expected}",
            detail={"line": line, "expected": expected},
        )
        self.line = line
        self.expected = expected


class DuplicateElement(CoarchError):
    """A diagram script declares the same element name twice."""

    code = "duplicate_element"
    http_status = 400

    def __init__(self, name: str, line: int) -> None:
        super().__init__(
            f"line {line}: element '{name}' already declared",
            detail={"element": name, "line": line},
        )
        self.element = name
        self.line = line


class UnclassifiedScenario(CoarchError):
    """Evaluation touched a scenario that was never classified."""

    code = "unclassified_scenario"
    http_status = 409

    def __init__(self, scenario_id: str) -> None:
        super().__init__(
            f"scenario {scenario_id} is unclassified",
            detail={"scenario_id": scenario_id},
        )
        self.scenario_id = scenario_id


class DanglingAsrReference(CoarchError):
    """A scenario cites a requirement id the project does not hold."""

    code = "dangling_asr_reference"
    http_status = 409

    def __init__(self, scenario_id: str, asr_id: str) -> None:
        super().__init__(
            f"scenario {scenario_id} cites unknown ASR {asr_id}",
            detail={"scenario_id": scenario_id, "asr_id": asr_id},
        )


class IllegalTransition(CoarchError):
    """The requested phase change is not an edge of the workflow."""

    code = "illegal_transition"
    http_status = 409
    exit_code = 2

    def __init__(self, from_state: str, to_state: str) -> None:
        super().__init__(
            f"no transition {from_state} -> {to_state}",
            detail={"from": from_state, "to": to_state},
        )


class GateUnsatisfied(CoarchError):
    """The phase change is an edge, but its entry condition fails."""

    code = "gate_unsatisfied"
    http_status = 409
    exit_code = 2

    def __init__(self, reason: str) -> None:
        super().__init__(reason, detail={"reason": reason})


class SequenceViolation(CoarchError):
    """Ledger append with a non-successor sequence number."""

    code = "sequence_violation"
    http_status = 409


class CorruptLedger(CoarchError):
    """Hash-chain verification failed: the ledger was edited in place."""

    code = "corrupt_ledger"
    http_status = 409

    def __init__(self, seq: int, reason: str) -> None:
        super().__init__(
            f"ledger entry {seq}: {reason}", detail={"seq": seq, "reason": reason}
        )
        self.seq = seq


class ProjectLocked(CoarchError):
    """Another writer holds the project directory lock."""

    code = "project_locked"
    http_status = 409
