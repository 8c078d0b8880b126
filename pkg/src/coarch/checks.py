"""Structural verification of patterns and tactics on a model graph.

Checks are pure functions over a parsed ModelGraph. A failed check
always names every violated condition with a stable machine-readable
reason code, so callers can render or act on individual violations.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Any

from .errors import UnknownElement
from .model import MemberKind, ModelElement, ModelGraph, Visibility

SINGLETON_KEY = "singleton"
DATA_MINIMIZED_KEY = "data_minimized"

# Default lexicon of member names considered sensitive personal data.
DEFAULT_SENSITIVE_FIELDS = frozenset({"address", "dob", "ssn", "full_history"})


class ReasonCode(str, Enum):
    MISSING_ANNOTATION = "missing_annotation"
    PUBLIC_CONSTRUCTOR = "public_constructor"
    NO_PUBLIC_STATIC_ACCESSOR = "no_public_static_accessor"
    SENSITIVE_FIELD_EXPOSED = "sensitive_field_exposed"


@dataclass(frozen=True)
class CheckReason:
    code: ReasonCode
    field: str | None = None

    def to_dict(self) -> dict[str, Any]:
        return {"code": self.code.value, "field": self.field}


@dataclass(frozen=True)
class CheckResult:
    element: str
    check: str
    passed: bool
    reasons: tuple[CheckReason, ...] = ()

    def __post_init__(self) -> None:
        if not self.passed and not self.reasons:
            raise ValueError("a failed check must carry at least one reason")
        if self.passed and self.reasons:
            raise ValueError("a passed check carries no reasons")

    def to_dict(self) -> dict[str, Any]:
        return {
            "element": self.element,
            "check": self.check,
            "passed": self.passed,
            "reasons": [r.to_dict() for r in self.reasons],
        }


def _element(model: ModelGraph, name: str) -> ModelElement:
    found = model.element(name)
    if found is None:
        raise UnknownElement(name)
    return found


def check_singleton(model: ModelGraph, element: str) -> CheckResult:
    """Verify the three structural singleton conditions on one element.

    Pass requires the singleton annotation, no public constructor (an
    operation named like the element), and at least one public static
    operation acting as the accessor. Only the element itself is
    consulted, never the rest of the graph.
    """

    target = _element(model, element)
    reasons = []
    if target.annotation(SINGLETON_KEY) is None:
        reasons.append(CheckReason(ReasonCode.MISSING_ANNOTATION))
    constructors = [
        m
        for m in target.members
        if m.name == target.name and m.kind is MemberKind.OPERATION
    ]
    if any(m.visibility is Visibility.PUBLIC for m in constructors):
        reasons.append(CheckReason(ReasonCode.PUBLIC_CONSTRUCTOR))
    accessors = [
        m
        for m in target.members
        if m.kind is MemberKind.OPERATION
        and m.visibility is Visibility.PUBLIC
        and m.static
    ]
    if not accessors:
        reasons.append(CheckReason(ReasonCode.NO_PUBLIC_STATIC_ACCESSOR))
    return CheckResult(
        element=element,
        check=SINGLETON_KEY,
        passed=not reasons,
        reasons=tuple(reasons),
    )


def check_tactic(
    model: ModelGraph,
    element: str,
    key: str,
    *,
    sensitive_fields: frozenset[str] = DEFAULT_SENSITIVE_FIELDS,
) -> CheckResult:
    """Verify that an element carries a tactic annotation.

    For data minimization the element additionally must not expose a
    public member whose name (case-insensitive) is in the sensitive
    field lexicon. The default lexicon can be overridden per call.
    """

    target = _element(model, element)
    reasons = []
    if target.annotation(key) is None:
        reasons.append(CheckReason(ReasonCode.MISSING_ANNOTATION))
    if key == DATA_MINIMIZED_KEY:
        lexicon = {name.lower() for name in sensitive_fields}
        exposed = sorted(
            m.name
            for m in target.members
            if m.visibility is Visibility.PUBLIC and m.name.lower() in lexicon
        )
        for field_name in exposed:
            reasons.append(
                CheckReason(ReasonCode.SENSITIVE_FIELD_EXPOSED, field=field_name)
            )
    return CheckResult(
        element=element, check=key, passed=not reasons, reasons=tuple(reasons)
    )
