"""Domain types shared across the architecting pipeline.

Pure value types: frozen dataclasses with no I/O and no knowledge of any
conversational backend. Every type has a canonical JSON encoding whose
top-level object carries ``schema_version: "1"``; nested objects omit it.

Type-level invariants are enforced at construction. Story-level invariants
are deliberately *not* enforced on :class:`ArchitectureStory` because
:func:`validate_story` reports them as data (defects), not failures.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Iterable, Mapping

from coarch.errors import SchemaViolation

SCHEMA_VERSION = "1"

# Metrics with a fixed unit; any other non-empty string is a free-form
# "other" metric label.
KNOWN_METRICS = frozenset(
    {"response_time_seconds", "distance_meters", "boolean", "count"}
)

# Annotation keys the checkers understand; other keys are carried verbatim.
KNOWN_ANNOTATION_KEYS = frozenset(
    {"singleton", "cached", "data_minimized", "encrypted"}
)


class AsrKind(str, Enum):
    FUNCTIONALITY = "functionality"
    QUALITY = "quality"
    CONSTRAINT = "constraint"


class AsrStatus(str, Enum):
    PROPOSED = "proposed"
    REFINED = "refined"
    ACCEPTED = "accepted"
    REJECTED = "rejected"


class Comparator(str, Enum):
    LE = "le"
    GE = "ge"
    EQ = "eq"


class DiagramKind(str, Enum):
    CLASS = "class_diagram"
    COMPONENT = "component_diagram"


class ElementKind(str, Enum):
    CLASS = "class"
    COMPONENT = "component"
    INTERFACE = "interface"


class MemberKind(str, Enum):
    ATTRIBUTE = "attribute"
    OPERATION = "operation"


class Visibility(str, Enum):
    PUBLIC = "public"
    PRIVATE = "private"


class RelationKind(str, Enum):
    ASSOCIATION = "association"
    DEPENDENCY = "dependency"
    REALIZATION = "realization"
    COMPOSITION = "composition"


class ScenarioKind(str, Enum):
    INDIVIDUAL = "individual"
    INTERACTING = "interacting"


class Classification(str, Enum):
    DIRECT = "direct"
    INDIRECT = "indirect"
    UNCLASSIFIED = "unclassified"


class Verdict(str, Enum):
    SATISFIED = "satisfied"
    PARTIAL = "partial"
    UNSATISFIED = "unsatisfied"
    UNKNOWN = "unknown"


class Origin(str, Enum):
    ARCHITECT = "architect"
    BOT = "bot"
    MERGED = "merged"


class ArtifactKind(str, Enum):
    STORY = "story"
    ASR = "asr"
    MODEL = "model"
    SCENARIO = "scenario"
    REPORT = "report"
    SESSION = "session"
    TRANSCRIPT = "transcript"


# ---------------------------------------------------------------------------
# Story


@dataclass(frozen=True)
class ScenarioSketch:
    title: str
    description: str = ""

    def to_dict(self) -> dict[str, Any]:
        return {"title": self.title, "description": self.description}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ScenarioSketch":
        return cls(
            title=_req_str(data, "title", "ScenarioSketch"),
            description=_opt_str(data, "description", "ScenarioSketch") or "",
        )


@dataclass(frozen=True)
class ArchitectureStory:
    """Natural-language problem narration plus enumerated scenarios."""

    id: str
    narrative: str
    scenarios: tuple[ScenarioSketch, ...] = ()
    domain_tags: tuple[str, ...] = ()

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "id": self.id,
            "narrative": self.narrative,
            "scenarios": [s.to_dict() for s in self.scenarios],
            "domain_tags": list(self.domain_tags),
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ArchitectureStory":
        _check_schema_version(data, "ArchitectureStory")
        return cls(
            id=_req_str(data, "id", "ArchitectureStory"),
            narrative=_req_str(data, "narrative", "ArchitectureStory", allow_empty=True),
            scenarios=tuple(
                ScenarioSketch.from_dict(s)
                for s in _req_list(data, "scenarios", "ArchitectureStory")
            ),
            domain_tags=_str_tuple(data.get("domain_tags", []), "domain_tags"),
        )


class StoryDefectCode(str, Enum):
    EMPTY_NARRATIVE = "empty_narrative"
    EMPTY_SCENARIO_TITLE = "empty_scenario_title"
    DUPLICATE_SCENARIO_TITLE = "duplicate_scenario_title"


@dataclass(frozen=True)
class StoryDefect:
    code: StoryDefectCode
    detail: str

    def to_dict(self) -> dict[str, Any]:
        return {"code": self.code.value, "detail": self.detail}


def validate_story(story: ArchitectureStory) -> list[StoryDefect]:
    """Report every story invariant violation; the story is ok iff none."""
    defects: list[StoryDefect] = []
    if not story.narrative.strip():
        defects.append(
            StoryDefect(StoryDefectCode.EMPTY_NARRATIVE, "narrative is empty")
        )
    seen: set[str] = set()
    for sketch in story.scenarios:
        if not sketch.title.strip():
            defects.append(
                StoryDefect(
                    StoryDefectCode.EMPTY_SCENARIO_TITLE, "scenario title is empty"
                )
            )
            continue
        if sketch.title in seen:
            defects.append(
                StoryDefect(
                    StoryDefectCode.DUPLICATE_SCENARIO_TITLE,
                    f"duplicate scenario title: {sketch.title}",
                )
            )
        seen.add(sketch.title)
    return defects


# ---------------------------------------------------------------------------
# Requirements


@dataclass(frozen=True)
class QuantifiedCriterion:
    """Measurable threshold attached to a quality ASR, e.g. <= 90 seconds."""

    metric: str
    comparator: Comparator
    value: float

    def __post_init__(self) -> None:
        if not self.metric.strip():
            raise ValueError("criterion metric must be non-empty")
        if not isinstance(self.value, (int, float)) or isinstance(self.value, bool):
            raise ValueError("criterion value must be a number")
        if not math.isfinite(self.value):
            raise ValueError("criterion value must be finite")
        if self.value < 0:
            raise ValueError("criterion value must be non-negative")

    def to_dict(self) -> dict[str, Any]:
        return {
            "metric": self.metric,
            "comparator": self.comparator.value,
            "value": self.value,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "QuantifiedCriterion":
        value = data.get("value")
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise SchemaViolation("QuantifiedCriterion: value must be a number")
        try:
            return cls(
                metric=_req_str(data, "metric", "QuantifiedCriterion"),
                comparator=_req_enum(data, "comparator", Comparator, "QuantifiedCriterion"),
                value=value,
            )
        except ValueError as exc:
            raise SchemaViolation(f"QuantifiedCriterion: {exc}") from exc


@dataclass(frozen=True)
class Asr:
    """One architecturally significant requirement."""

    id: str
    kind: AsrKind
    statement: str
    criterion: QuantifiedCriterion | None = None
    tags: tuple[str, ...] = ()
    status: AsrStatus = AsrStatus.PROPOSED

    def __post_init__(self) -> None:
        if (
            self.kind is AsrKind.QUALITY
            and self.status is AsrStatus.ACCEPTED
            and self.criterion is None
        ):
            raise ValueError(
                f"{self.id}: an accepted quality ASR requires a quantified criterion"
            )

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "id": self.id,
            "kind": self.kind.value,
            "statement": self.statement,
            "criterion": self.criterion.to_dict() if self.criterion else None,
            "tags": list(self.tags),
            "status": self.status.value,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Asr":
        _check_schema_version(data, "Asr")
        criterion_data = data.get("criterion")
        criterion = (
            QuantifiedCriterion.from_dict(criterion_data)
            if criterion_data is not None
            else None
        )
        try:
            return cls(
                id=_req_str(data, "id", "Asr"),
                kind=_req_enum(data, "kind", AsrKind, "Asr"),
                statement=_req_str(data, "statement", "Asr", allow_empty=True),
                criterion=criterion,
                tags=_str_tuple(data.get("tags", []), "tags"),
                status=_req_enum(data, "status", AsrStatus, "Asr"),
            )
        except ValueError as exc:
            raise SchemaViolation(f"Asr: {exc}") from exc


def new_asr_id(existing: Iterable[str]) -> str:
    """Lexicographically smallest unused id in the scheme ASR-001, ASR-002, ..."""
    return new_sequential_id("ASR", existing)


def new_sequential_id(prefix: str, existing: Iterable[str]) -> str:
    taken = set(existing)
    n = 1
    while f"{prefix}-{n:03d}" in taken:
        n += 1
    return f"{prefix}-{n:03d}"


# ---------------------------------------------------------------------------
# Model graph


@dataclass(frozen=True)
class Annotation:
    """Stereotype on a model element, e.g. singleton or cached."""

    key: str
    note: str | None = None

    def __post_init__(self) -> None:
        if not self.key.strip():
            raise ValueError("annotation key must be non-empty")

    def to_dict(self) -> dict[str, Any]:
        return {"key": self.key, "note": self.note}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Annotation":
        return cls(
            key=_req_str(data, "key", "Annotation"),
            note=_opt_str(data, "note", "Annotation"),
        )


@dataclass(frozen=True)
class Member:
    name: str
    kind: MemberKind
    visibility: Visibility
    static: bool = False

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "kind": self.kind.value,
            "visibility": self.visibility.value,
            "static": self.static,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Member":
        return cls(
            name=_req_str(data, "name", "Member"),
            kind=_req_enum(data, "kind", MemberKind, "Member"),
            visibility=_req_enum(data, "visibility", Visibility, "Member"),
            static=bool(data.get("static", False)),
        )


@dataclass(frozen=True)
class ModelElement:
    name: str
    kind: ElementKind
    members: tuple[Member, ...] = ()
    annotations: tuple[Annotation, ...] = ()

    def __post_init__(self) -> None:
        member_names = [m.name for m in self.members]
        if len(member_names) != len(set(member_names)):
            raise ValueError(f"{self.name}: member names must be unique")
        keys = [a.key for a in self.annotations]
        if len(keys) != len(set(keys)):
            raise ValueError(f"{self.name}: at most one annotation per key")

    def annotation(self, key: str) -> Annotation | None:
        for ann in self.annotations:
            if ann.key == key:
                return ann
        return None

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "kind": self.kind.value,
            "members": [m.to_dict() for m in self.members],
            "annotations": [a.to_dict() for a in self.annotations],
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ModelElement":
        try:
            return cls(
                name=_req_str(data, "name", "ModelElement"),
                kind=_req_enum(data, "kind", ElementKind, "ModelElement"),
                members=tuple(
                    Member.from_dict(m)
                    for m in _req_list(data, "members", "ModelElement")
                ),
                annotations=tuple(
                    Annotation.from_dict(a)
                    for a in _req_list(data, "annotations", "ModelElement")
                ),
            )
        except ValueError as exc:
            raise SchemaViolation(f"ModelElement: {exc}") from exc


@dataclass(frozen=True)
class Relation:
    source: str
    target: str
    kind: RelationKind
    label: str | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "source": self.source,
            "target": self.target,
            "kind": self.kind.value,
            "label": self.label,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Relation":
        return cls(
            source=_req_str(data, "source", "Relation"),
            target=_req_str(data, "target", "Relation"),
            kind=_req_enum(data, "kind", RelationKind, "Relation"),
            label=_opt_str(data, "label", "Relation"),
        )


@dataclass(frozen=True)
class ModelGraph:
    """Parsed UML-subset model: elements plus relations between them."""

    diagram_kind: DiagramKind
    elements: tuple[ModelElement, ...] = ()
    relations: tuple[Relation, ...] = ()

    def __post_init__(self) -> None:
        names = [e.name for e in self.elements]
        if len(names) != len(set(names)):
            raise ValueError("element names must be unique per graph")
        known = set(names)
        for rel in self.relations:
            for endpoint in (rel.source, rel.target):
                if endpoint not in known:
                    raise ValueError(f"relation endpoint '{endpoint}' is not declared")

    def element_names(self) -> list[str]:
        return [e.name for e in self.elements]

    def element(self, name: str) -> ModelElement | None:
        for elem in self.elements:
            if elem.name == name:
                return elem
        return None

    def related(self, a: str, b: str) -> bool:
        """True when some relation connects a and b, either direction."""
        return any(
            (r.source == a and r.target == b) or (r.source == b and r.target == a)
            for r in self.relations
        )

    def add_element(self, element: ModelElement) -> "ModelGraph":
        return replace(self, elements=self.elements + (element,))

    def remove_element(self, name: str) -> "ModelGraph":
        """Remove an element and every relation incident to it."""
        return replace(
            self,
            elements=tuple(e for e in self.elements if e.name != name),
            relations=tuple(
                r for r in self.relations if name not in (r.source, r.target)
            ),
        )

    def add_relation(self, relation: Relation) -> "ModelGraph":
        return replace(self, relations=self.relations + (relation,))

    def remove_relation(self, relation: Relation) -> "ModelGraph":
        return replace(
            self, relations=tuple(r for r in self.relations if r != relation)
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "diagram_kind": self.diagram_kind.value,
            "elements": [e.to_dict() for e in self.elements],
            "relations": [r.to_dict() for r in self.relations],
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ModelGraph":
        _check_schema_version(data, "ModelGraph")
        try:
            return cls(
                diagram_kind=_req_enum(data, "diagram_kind", DiagramKind, "ModelGraph"),
                elements=tuple(
                    ModelElement.from_dict(e)
                    for e in _req_list(data, "elements", "ModelGraph")
                ),
                relations=tuple(
                    Relation.from_dict(r)
                    for r in _req_list(data, "relations", "ModelGraph")
                ),
            )
        except ValueError as exc:
            raise SchemaViolation(f"ModelGraph: {exc}") from exc


# ---------------------------------------------------------------------------
# Evaluation


@dataclass(frozen=True)
class SaamScenario:
    """Scenario used for scenario-based architecture evaluation."""

    id: str
    text: str
    kind: ScenarioKind
    classification: Classification = Classification.UNCLASSIFIED
    affected_elements: tuple[str, ...] = ()
    source_asrs: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.kind is ScenarioKind.INTERACTING and len(self.affected_elements) < 2:
            raise ValueError(
                f"{self.id}: an interacting scenario needs >= 2 affected elements"
            )
        if len(set(self.affected_elements)) != len(self.affected_elements):
            raise ValueError(f"{self.id}: affected elements must be unique")
        if (
            self.classification is not Classification.UNCLASSIFIED
            and not self.affected_elements
        ):
            raise ValueError(
                f"{self.id}: a classified scenario needs affected elements"
            )

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "id": self.id,
            "text": self.text,
            "kind": self.kind.value,
            "classification": self.classification.value,
            "affected_elements": list(self.affected_elements),
            "source_asrs": list(self.source_asrs),
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "SaamScenario":
        _check_schema_version(data, "SaamScenario")
        try:
            return cls(
                id=_req_str(data, "id", "SaamScenario"),
                text=_req_str(data, "text", "SaamScenario", allow_empty=True),
                kind=_req_enum(data, "kind", ScenarioKind, "SaamScenario"),
                classification=_req_enum(
                    data, "classification", Classification, "SaamScenario"
                ),
                affected_elements=_str_tuple(
                    data.get("affected_elements", []), "affected_elements"
                ),
                source_asrs=_str_tuple(data.get("source_asrs", []), "source_asrs"),
            )
        except ValueError as exc:
            raise SchemaViolation(f"SaamScenario: {exc}") from exc


@dataclass(frozen=True)
class MatrixMark:
    """One mark in the scenario/element interaction matrix."""

    scenario_id: str
    element: str
    marker: str

    def to_dict(self) -> dict[str, Any]:
        return {
            "scenario_id": self.scenario_id,
            "element": self.element,
            "marker": self.marker,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "MatrixMark":
        return cls(
            scenario_id=_req_str(data, "scenario_id", "MatrixMark"),
            element=_req_str(data, "element", "MatrixMark"),
            marker=_req_str(data, "marker", "MatrixMark"),
        )


@dataclass(frozen=True)
class EvaluationReport:
    per_asr_verdicts: tuple[tuple[str, Verdict], ...]
    interaction_matrix: tuple[MatrixMark, ...] = ()
    hotspots: tuple[str, ...] = ()
    summary: str = ""

    def __post_init__(self) -> None:
        # Both maps are canonically sorted so the encoding is byte-stable.
        ids = [asr_id for asr_id, _ in self.per_asr_verdicts]
        if len(ids) != len(set(ids)):
            raise ValueError("duplicate ASR id in per_asr_verdicts")
        cells = [(m.scenario_id, m.element) for m in self.interaction_matrix]
        if len(cells) != len(set(cells)):
            raise ValueError("duplicate (scenario, element) mark in interaction_matrix")
        object.__setattr__(
            self, "per_asr_verdicts", tuple(sorted(self.per_asr_verdicts))
        )
        object.__setattr__(
            self,
            "interaction_matrix",
            tuple(
                sorted(self.interaction_matrix, key=lambda m: (m.scenario_id, m.element))
            ),
        )
        marked = {mark.element for mark in self.interaction_matrix}
        for name in self.hotspots:
            if name not in marked:
                raise ValueError(
                    f"hotspot '{name}' does not appear in the interaction matrix"
                )

    def verdicts(self) -> dict[str, Verdict]:
        return dict(self.per_asr_verdicts)

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "per_asr_verdicts": {
                asr_id: verdict.value for asr_id, verdict in self.per_asr_verdicts
            },
            "interaction_matrix": [m.to_dict() for m in self.interaction_matrix],
            "hotspots": list(self.hotspots),
            "summary": self.summary,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "EvaluationReport":
        _check_schema_version(data, "EvaluationReport")
        verdicts_raw = data.get("per_asr_verdicts")
        if not isinstance(verdicts_raw, Mapping):
            raise SchemaViolation("EvaluationReport: per_asr_verdicts must be an object")
        try:
            verdicts = tuple(
                (str(asr_id), Verdict(value)) for asr_id, value in verdicts_raw.items()
            )
            return cls(
                per_asr_verdicts=verdicts,
                interaction_matrix=tuple(
                    MatrixMark.from_dict(m)
                    for m in _req_list(data, "interaction_matrix", "EvaluationReport")
                ),
                hotspots=_str_tuple(data.get("hotspots", []), "hotspots"),
                summary=_opt_str(data, "summary", "EvaluationReport") or "",
            )
        except ValueError as exc:
            raise SchemaViolation(f"EvaluationReport: {exc}") from exc


# ---------------------------------------------------------------------------
# Provenance


@dataclass(frozen=True)
class ArtifactRef:
    kind: ArtifactKind
    id: str
    field: str | None = None

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind.value, "id": self.id, "field": self.field}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ArtifactRef":
        _reject_unknown_keys(data, ("kind", "id", "field"), "ArtifactRef")
        return cls(
            kind=_req_enum(data, "kind", ArtifactKind, "ArtifactRef"),
            id=_req_str(data, "id", "ArtifactRef"),
            field=_opt_str(data, "field", "ArtifactRef"),
        )


@dataclass(frozen=True)
class ProvenanceEvent:
    """Unsequenced provenance note emitted by an engine operation.

    The store assigns the sequence number and timestamp when the event
    lands in the ledger.
    """

    artifact_ref: ArtifactRef
    origin: Origin
    turn_ref: str | None = None

    def sequenced(self, seq: int, timestamp: str) -> "ProvenanceRecord":
        return ProvenanceRecord(
            seq=seq,
            artifact_ref=self.artifact_ref,
            origin=self.origin,
            turn_ref=self.turn_ref,
            timestamp=timestamp,
        )


@dataclass(frozen=True)
class ProvenanceRecord:
    """Append-only note of which actor produced one artifact change."""

    seq: int
    artifact_ref: ArtifactRef
    origin: Origin
    turn_ref: str | None = None
    timestamp: str = ""

    def __post_init__(self) -> None:
        if self.seq < 1:
            raise ValueError("provenance seq starts at 1")

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "seq": self.seq,
            "artifact_ref": self.artifact_ref.to_dict(),
            "origin": self.origin.value,
            "turn_ref": self.turn_ref,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ProvenanceRecord":
        # Ledger digests cover to_dict output only, so a key the decoder
        # ignored would be a blind spot; the record schema is closed.
        _reject_unknown_keys(
            data,
            ("schema_version", "seq", "artifact_ref", "origin", "turn_ref", "timestamp"),
            "ProvenanceRecord",
        )
        _check_schema_version(data, "ProvenanceRecord")
        seq = data.get("seq")
        if not isinstance(seq, int) or isinstance(seq, bool):
            raise SchemaViolation("ProvenanceRecord: seq must be an integer")
        ref = data.get("artifact_ref")
        if not isinstance(ref, Mapping):
            raise SchemaViolation("ProvenanceRecord: artifact_ref must be an object")
        try:
            return cls(
                seq=seq,
                artifact_ref=ArtifactRef.from_dict(ref),
                origin=_req_enum(data, "origin", Origin, "ProvenanceRecord"),
                turn_ref=_opt_str(data, "turn_ref", "ProvenanceRecord"),
                timestamp=_opt_str(data, "timestamp", "ProvenanceRecord") or "",
            )
        except ValueError as exc:
            raise SchemaViolation(f"ProvenanceRecord: {exc}") from exc


# ---------------------------------------------------------------------------
# Canonical JSON helpers


def canonical_json(value: Any) -> str:
    """Sorted-key, compact, UTF-8 JSON: the one true byte encoding."""
    return json.dumps(value, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def to_json(obj: Any) -> str:
    return canonical_json(obj.to_dict())


def _check_schema_version(data: Mapping[str, Any], where: str) -> None:
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaViolation(
            f"{where}: unsupported schema_version {version!r}"
        )


def _reject_unknown_keys(
    data: Mapping[str, Any], allowed: tuple[str, ...], where: str
) -> None:
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        raise SchemaViolation(f"{where}: unknown keys: {', '.join(unknown)}")


def _req_str(
    data: Mapping[str, Any], key: str, where: str, *, allow_empty: bool = False
) -> str:
    value = data.get(key)
    if not isinstance(value, str) or (not allow_empty and not value):
        raise SchemaViolation(f"{where}: field '{key}' must be a non-empty string")
    return value


def _opt_str(data: Mapping[str, Any], key: str, where: str) -> str | None:
    value = data.get(key)
    if value is None:
        return None
    if not isinstance(value, str):
        raise SchemaViolation(f"{where}: field '{key}' must be a string or null")
    return value


def _req_list(data: Mapping[str, Any], key: str, where: str) -> list[Any]:
    value = data.get(key)
    if not isinstance(value, list):
        raise SchemaViolation(f"{where}: field '{key}' must be a list")
    return value


def _req_enum(data: Mapping[str, Any], key: str, enum_cls: type, where: str) -> Any:
    value = data.get(key)
    try:
        return enum_cls(value)
    except ValueError:
        raise SchemaViolation(
            f"{where}: field '{key}' has unknown value {value!r}"
        ) from None


def _str_tuple(value: Any, key: str) -> tuple[str, ...]:
    if not isinstance(value, list) or any(not isinstance(v, str) for v in value):
        raise SchemaViolation(f"field '{key}' must be a list of strings")
    return tuple(value)
