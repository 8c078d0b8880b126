"""Project store: phase machine, artifact files, event log, ledger.

A project is a directory.  Artifact files (story.md, asrs.json, models/,
scenarios.json, reports/) hold the current state; events.jsonl is the
append-only log of domain events from which that state can be rebuilt;
ledger.jsonl is the hash-chained provenance record of who changed what.
Every mutation happens under an advisory lock and lands in all three
places before the call returns.

Wall-clock timestamps appear in ledger records and nowhere else, so two
runs of the same session differ only there.
"""

from __future__ import annotations

import json
import os
from contextlib import contextmanager
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Iterator, Mapping, Sequence

from . import analysis
from .errors import (
    GateUnsatisfied,
    IllegalTransition,
    InvalidPayload,
    PreconditionFailed,
    ProjectLocked,
    SchemaViolation,
    UnknownArtifact,
    UnknownProject,
)
from .gateway import Clock, SystemClock
from .ledger import LedgerEntry, append_provenance, parse_ledger, serialize_ledger
from .model import (
    SCHEMA_VERSION,
    ArchitectureStory,
    ArtifactKind,
    ArtifactRef,
    Asr,
    AsrStatus,
    DiagramKind,
    EvaluationReport,
    ModelGraph,
    Origin,
    ProvenanceEvent,
    SaamScenario,
    ScenarioSketch,
    canonical_json,
    validate_story,
)
from .uml import parse_source

PROJECT_FILE = "project.json"
STORY_FILE = "story.md"
ASRS_FILE = "asrs.json"
REFINEMENTS_FILE = "refinements.jsonl"
SCENARIOS_FILE = "scenarios.json"
EVENTS_FILE = "events.jsonl"
LEDGER_FILE = "ledger.jsonl"
MODELS_DIR = "models"
REPORTS_DIR = "reports"
TRANSCRIPTS_DIR = "transcripts"
LOCK_FILE = ".lock"


class Phase(str, Enum):
    STORY_CAPTURE = "story_capture"
    ANALYSIS = "analysis"
    SYNTHESIS = "synthesis"
    EVALUATION = "evaluation"
    REPORTED = "reported"


# Forward edges plus the return-to-analysis edge from every later phase.
ALLOWED_TRANSITIONS = frozenset(
    {
        (Phase.STORY_CAPTURE, Phase.ANALYSIS),
        (Phase.ANALYSIS, Phase.SYNTHESIS),
        (Phase.SYNTHESIS, Phase.ANALYSIS),
        (Phase.SYNTHESIS, Phase.EVALUATION),
        (Phase.EVALUATION, Phase.SYNTHESIS),
        (Phase.EVALUATION, Phase.REPORTED),
        (Phase.EVALUATION, Phase.ANALYSIS),
        (Phase.REPORTED, Phase.ANALYSIS),
    }
)


@dataclass(frozen=True)
class ModelRevision:
    id: str
    diagram_kind: DiagramKind
    script: str

    def graph(self) -> ModelGraph:
        return parse_source(self.script, self.diagram_kind)


@dataclass(frozen=True)
class StoredReport:
    id: str
    report: EvaluationReport


@dataclass(frozen=True)
class ProjectState:
    """Everything the event log can rebuild; no timestamps, no transcripts."""

    id: str
    phase: Phase = Phase.STORY_CAPTURE
    revision: int = 0
    story: ArchitectureStory | None = None
    asrs: tuple[Asr, ...] = ()
    models: tuple[ModelRevision, ...] = ()
    scenarios: tuple[SaamScenario, ...] = ()
    reports: tuple[StoredReport, ...] = ()

    def accepted_asrs(self) -> tuple[Asr, ...]:
        return tuple(a for a in self.asrs if a.status is AsrStatus.ACCEPTED)

    def latest_model(self) -> ModelRevision | None:
        return self.models[-1] if self.models else None

    def latest_report(self) -> StoredReport | None:
        return self.reports[-1] if self.reports else None


def entry_gate(state: ProjectState, to: Phase) -> str | None:
    """Reason the given phase cannot be entered yet, or None if it can."""
    if to is Phase.ANALYSIS and state.story is None:
        return "analysis requires an imported story"
    if to is Phase.SYNTHESIS and not state.accepted_asrs():
        return "synthesis requires at least one accepted requirement"
    if to is Phase.EVALUATION and not state.models:
        return "evaluation requires at least one model revision"
    if to is Phase.REPORTED and not state.reports:
        return "reporting requires an evaluation report"
    return None


def transition_state(state: ProjectState, to: Phase) -> ProjectState:
    """Move to another phase: the edge must exist and its gate must hold."""
    if (state.phase, to) not in ALLOWED_TRANSITIONS:
        raise IllegalTransition(state.phase.value, to.value)
    reason = entry_gate(state, to)
    if reason is not None:
        raise GateUnsatisfied(reason)
    return replace(state, phase=to, revision=state.revision + 1)


# ---------------------------------------------------------------------------
# story.md


def serialize_story(story: ArchitectureStory) -> str:
    """Render a story as markdown that parse_story reads back verbatim.

    The format reserves a few characters, so titles must not contain
    ': ' or newlines, tags must not contain commas, and the narrative
    must not contain the section heading lines themselves.
    """
    for sketch in story.scenarios:
        if ": " in sketch.title or "\n" in sketch.title:
            raise InvalidPayload(
                f"scenario title cannot contain ': ' or newlines: {sketch.title!r}"
            )
        if "\n" in sketch.description:
            raise InvalidPayload("scenario description must be a single line")
    for tag in story.domain_tags:
        if not tag.strip() or "," in tag or "\n" in tag:
            raise InvalidPayload(f"malformed domain tag: {tag!r}")
    for line in story.narrative.splitlines():
        if line.strip() in ("## Scenarios", "## Tags") or line.startswith("# "):
            raise InvalidPayload(f"narrative line collides with story markup: {line!r}")

    lines = [f"# {story.id}", ""]
    narrative = story.narrative.strip()
    if narrative:
        lines.append(narrative)
        lines.append("")
    if story.scenarios:
        lines.append("## Scenarios")
        lines.append("")
        for sketch in story.scenarios:
            title = sketch.title.strip()
            if sketch.description.strip():
                lines.append(f"- {title}: {sketch.description.strip()}")
            else:
                lines.append(f"- {title}")
        lines.append("")
    if story.domain_tags:
        lines.append("## Tags")
        lines.append("")
        lines.append(", ".join(story.domain_tags))
        lines.append("")
    return "\n".join(lines)


def parse_story(text: str) -> ArchitectureStory:
    lines = text.splitlines()
    index = 0
    while index < len(lines) and not lines[index].strip():
        index += 1
    if index == len(lines) or not lines[index].startswith("# "):
        raise SchemaViolation("story file must start with '# <id>'")
    story_id = lines[index][2:].strip()
    if not story_id:
        raise SchemaViolation("story id is empty")
    index += 1

    narrative_lines: list[str] = []
    scenarios: list[ScenarioSketch] = []
    tags: list[str] = []
    section = "narrative"
    for line in lines[index:]:
        stripped = line.strip()
        if stripped == "## Scenarios":
            section = "scenarios"
            continue
        if stripped == "## Tags":
            section = "tags"
            continue
        if section == "narrative":
            narrative_lines.append(line)
        elif section == "scenarios":
            if not stripped:
                continue
            if not stripped.startswith("- "):
                raise SchemaViolation(f"expected '- <title>' scenario line: {line!r}")
            body = stripped[2:]
            if ": " in body:
                title, description = body.split(": ", 1)
            else:
                title, description = body, ""
            scenarios.append(ScenarioSketch(title=title.strip(), description=description))
        else:
            if stripped:
                tags.extend(t.strip() for t in stripped.split(",") if t.strip())
    return ArchitectureStory(
        id=story_id,
        narrative="\n".join(narrative_lines).strip(),
        scenarios=tuple(scenarios),
        domain_tags=tuple(tags),
    )


# ---------------------------------------------------------------------------
# Domain events


def replay_events(events: Iterable[Mapping[str, Any]]) -> ProjectState:
    """Fold the event log into a state, revalidating every step."""
    state: ProjectState | None = None
    for event in events:
        kind = event.get("event")
        if state is None:
            if kind != "project_created":
                raise SchemaViolation("event log must start with project_created")
            state = ProjectState(id=str(event["id"]))
            continue
        state = _apply_event(state, event)
    if state is None:
        raise SchemaViolation("event log is empty")
    return state


def _apply_event(state: ProjectState, event: Mapping[str, Any]) -> ProjectState:
    kind = event.get("event")
    if kind == "story_imported":
        return replace(state, story=ArchitectureStory.from_dict(event["story"]))
    if kind == "transition":
        return transition_state(state, Phase(event["to"]))
    if kind == "asrs_proposed":
        proposed = tuple(Asr.from_dict(a) for a in event["asrs"])
        return replace(state, asrs=state.asrs + proposed)
    if kind == "refinement_applied":
        op = analysis.RefinementOp.from_dict(event["op"])
        updated, _ = analysis.apply_refinement(
            state.asrs, op, Origin(event["origin"]), turn_ref=event.get("turn_ref")
        )
        return replace(state, asrs=updated)
    if kind == "asrs_accepted":
        return replace(state, asrs=analysis.accept_asrs(state.asrs, event["ids"]))
    if kind == "model_added":
        revision = ModelRevision(
            id=str(event["id"]),
            diagram_kind=DiagramKind(event["diagram_kind"]),
            script=str(event["script"]),
        )
        return replace(state, models=state.models + (revision,))
    if kind == "scenarios_added":
        added = tuple(SaamScenario.from_dict(s) for s in event["scenarios"])
        return replace(state, scenarios=state.scenarios + added)
    if kind == "report_added":
        stored = StoredReport(
            id=str(event["id"]), report=EvaluationReport.from_dict(event["report"])
        )
        return replace(state, reports=state.reports + (stored,))
    raise SchemaViolation(f"unknown event kind: {kind!r}")


# ---------------------------------------------------------------------------
# Provenance summary


@dataclass(frozen=True)
class ProvenanceSummary:
    by_kind: Mapping[str, Mapping[str, int]]
    total: int
    human_reviewed: bool

    def to_dict(self) -> dict[str, Any]:
        return {
            "by_kind": {k: dict(v) for k, v in self.by_kind.items()},
            "total": self.total,
            "human_reviewed": self.human_reviewed,
        }


def provenance_summary(entries: Sequence[LedgerEntry]) -> ProvenanceSummary:
    """Group ledger records by artifact kind and origin.

    An artifact counts as human-reviewed when at least one of its records
    has architect or merged origin; the flag is the conjunction over all
    artifacts other than session bookkeeping.
    """
    by_kind = {
        kind.value: {origin.value: 0 for origin in Origin} for kind in ArtifactKind
    }
    reviewed: dict[tuple[str, str], bool] = {}
    for entry in entries:
        record = entry.record
        ref = record.artifact_ref
        by_kind[ref.kind.value][record.origin.value] += 1
        if ref.kind is ArtifactKind.SESSION:
            continue
        key = (ref.kind.value, ref.id)
        hit = record.origin in (Origin.ARCHITECT, Origin.MERGED)
        reviewed[key] = reviewed.get(key, False) or hit
    return ProvenanceSummary(
        by_kind=by_kind,
        total=len(entries),
        human_reviewed=all(reviewed.values()),
    )


# ---------------------------------------------------------------------------
# The store


def _dump_json(payload: Mapping[str, Any]) -> str:
    return json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


@dataclass
class ProjectStore:
    root: Path
    state: ProjectState
    entries: tuple[LedgerEntry, ...] = ()
    transcript_names: tuple[str, ...] = ()
    clock: Clock = field(default_factory=SystemClock)

    # -- lifecycle

    @classmethod
    def create(cls, root: Path, project_id: str, clock: Clock | None = None) -> "ProjectStore":
        root = Path(root)
        if (root / PROJECT_FILE).exists():
            raise PreconditionFailed(f"project already initialized at {root}")
        if not project_id.strip():
            raise InvalidPayload("project id is empty")
        root.mkdir(parents=True, exist_ok=True)
        for sub in (MODELS_DIR, REPORTS_DIR, TRANSCRIPTS_DIR):
            (root / sub).mkdir(exist_ok=True)
        store = cls(root=root, state=ProjectState(id=project_id), clock=clock or SystemClock())
        (root / LEDGER_FILE).write_text("", encoding="utf-8")
        with (root / EVENTS_FILE).open("w", encoding="utf-8") as handle:
            handle.write(
                canonical_json(
                    {
                        "schema_version": SCHEMA_VERSION,
                        "event": "project_created",
                        "id": project_id,
                    }
                )
                + "\n"
            )
        store._write_project_file()
        return store

    @classmethod
    def open(cls, root: Path, clock: Clock | None = None) -> "ProjectStore":
        root = Path(root)
        meta_path = root / PROJECT_FILE
        if not meta_path.exists():
            raise UnknownProject(f"no project at {root}")
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
        if meta.get("schema_version") != SCHEMA_VERSION:
            raise SchemaViolation("project.json: unsupported schema_version")

        story = None
        story_path = root / STORY_FILE
        if story_path.exists():
            story = parse_story(story_path.read_text(encoding="utf-8"))

        asrs: tuple[Asr, ...] = ()
        asrs_path = root / ASRS_FILE
        if asrs_path.exists():
            data = json.loads(asrs_path.read_text(encoding="utf-8"))
            asrs = tuple(Asr.from_dict(a) for a in data["asrs"])

        models = []
        for item in meta.get("model_revisions", []):
            rev_id = str(item["id"])
            script = (root / MODELS_DIR / f"{rev_id}.puml").read_text(encoding="utf-8")
            models.append(
                ModelRevision(
                    id=rev_id,
                    diagram_kind=DiagramKind(item["diagram_kind"]),
                    script=script,
                )
            )

        scenarios: tuple[SaamScenario, ...] = ()
        scenarios_path = root / SCENARIOS_FILE
        if scenarios_path.exists():
            data = json.loads(scenarios_path.read_text(encoding="utf-8"))
            scenarios = tuple(SaamScenario.from_dict(s) for s in data["scenarios"])

        reports = []
        for report_id in meta.get("reports", []):
            payload = json.loads(
                (root / REPORTS_DIR / f"{report_id}.json").read_text(encoding="utf-8")
            )
            reports.append(
                StoredReport(id=str(report_id), report=EvaluationReport.from_dict(payload))
            )

        ledger_path = root / LEDGER_FILE
        entries = (
            parse_ledger(ledger_path.read_bytes()) if ledger_path.exists() else ()
        )

        state = ProjectState(
            id=str(meta["id"]),
            phase=Phase(meta["phase"]),
            revision=int(meta["revision"]),
            story=story,
            asrs=asrs,
            models=tuple(models),
            scenarios=scenarios,
            reports=tuple(reports),
        )
        return cls(
            root=root,
            state=state,
            entries=entries,
            transcript_names=tuple(str(n) for n in meta.get("transcripts", [])),
            clock=clock or SystemClock(),
        )

    # -- locking

    @contextmanager
    def _write_lock(self) -> Iterator[None]:
        path = self.root / LOCK_FILE
        try:
            fd = os.open(path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise ProjectLocked(
                f"project {self.state.id} is locked by another writer"
                f" (remove {path} if stale)"
            ) from None
        try:
            os.write(fd, f"{os.getpid()}\n".encode())
            os.close(fd)
            yield
        finally:
            path.unlink(missing_ok=True)

    # -- mutations

    def import_story(self, story: ArchitectureStory) -> int:
        with self._write_lock():
            if self.state.story is not None:
                raise PreconditionFailed("a story is already imported")
            if self.state.phase is not Phase.STORY_CAPTURE:
                raise PreconditionFailed(
                    f"stories are imported in story_capture, not {self.state.phase.value}"
                )
            defects = validate_story(story)
            if defects:
                raise PreconditionFailed(
                    "story fails validation",
                    detail={"defects": [d.to_dict() for d in defects]},
                )
            text = serialize_story(story)
            state = replace(self.state, story=parse_story(text))
            (self.root / STORY_FILE).write_text(text, encoding="utf-8")
            return self._apply(
                state,
                events=[{"event": "story_imported", "story": state.story.to_dict()}],
                records=[
                    ProvenanceEvent(
                        artifact_ref=ArtifactRef(kind=ArtifactKind.STORY, id=story.id),
                        origin=Origin.ARCHITECT,
                    )
                ],
            )

    def transition(self, to: Phase) -> int:
        with self._write_lock():
            state, events, records = self._step(self.state, to)
            return self._apply(state, events=events, records=records)

    def propose_asrs(
        self,
        asrs: Sequence[Asr],
        records: Sequence[ProvenanceEvent],
        transcript: bytes | None = None,
        activity: str = "analysis",
    ) -> int:
        if not asrs:
            raise InvalidPayload("no requirements to record")
        with self._write_lock():
            state, events, pending = self._enter(Phase.ANALYSIS)
            state = replace(state, asrs=state.asrs + tuple(asrs))
            events.append(
                {"event": "asrs_proposed", "asrs": [a.to_dict() for a in asrs]}
            )
            pending.extend(records)
            self._write_asrs(state)
            if transcript is not None:
                pending.append(self._store_transcript(activity, transcript))
            return self._apply(state, events=events, records=pending)

    def apply_refinement(
        self,
        op: analysis.RefinementOp,
        origin: Origin = Origin.ARCHITECT,
        turn_ref: str | None = None,
    ) -> int:
        with self._write_lock():
            state, events, pending = self._enter(Phase.ANALYSIS)
            updated, record = analysis.apply_refinement(
                state.asrs, op, origin, turn_ref=turn_ref
            )
            state = replace(state, asrs=updated)
            line = {
                "schema_version": SCHEMA_VERSION,
                "op": op.to_dict(),
                "origin": origin.value,
                "turn_ref": turn_ref,
            }
            events.append(
                {
                    "event": "refinement_applied",
                    "op": op.to_dict(),
                    "origin": origin.value,
                    "turn_ref": turn_ref,
                }
            )
            pending.append(record)
            self._write_asrs(state)
            with (self.root / REFINEMENTS_FILE).open("a", encoding="utf-8") as handle:
                handle.write(canonical_json(line) + "\n")
            return self._apply(state, events=events, records=pending)

    def accept_asrs(self, ids: Sequence[str]) -> int:
        if not ids:
            raise InvalidPayload("no requirement ids to accept")
        with self._write_lock():
            state, events, pending = self._enter(Phase.ANALYSIS)
            state = replace(state, asrs=analysis.accept_asrs(state.asrs, ids))
            events.append({"event": "asrs_accepted", "ids": list(ids)})
            pending.append(
                ProvenanceEvent(
                    artifact_ref=ArtifactRef(
                        kind=ArtifactKind.SESSION,
                        id=state.id,
                        field="accept:" + ",".join(ids),
                    ),
                    origin=Origin.ARCHITECT,
                )
            )
            self._write_asrs(state)
            return self._apply(state, events=events, records=pending)

    def add_model_revision(
        self,
        diagram_kind: DiagramKind,
        script: str,
        turn_ref: str | None = None,
        transcript: bytes | None = None,
        activity: str = "synthesis",
    ) -> tuple[str, int]:
        parse_source(script, diagram_kind)
        with self._write_lock():
            state, events, pending = self._enter(Phase.SYNTHESIS)
            nth = sum(1 for m in state.models if m.diagram_kind is diagram_kind) + 1
            rev_id = f"{diagram_kind.value}-{nth}"
            revision = ModelRevision(id=rev_id, diagram_kind=diagram_kind, script=script)
            state = replace(state, models=state.models + (revision,))
            (self.root / MODELS_DIR / f"{rev_id}.puml").write_text(
                script, encoding="utf-8"
            )
            events.append(
                {
                    "event": "model_added",
                    "id": rev_id,
                    "diagram_kind": diagram_kind.value,
                    "script": script,
                }
            )
            pending.append(
                ProvenanceEvent(
                    artifact_ref=ArtifactRef(kind=ArtifactKind.MODEL, id=rev_id),
                    origin=Origin.BOT,
                    turn_ref=turn_ref,
                )
            )
            if transcript is not None:
                pending.append(self._store_transcript(activity, transcript))
            return rev_id, self._apply(state, events=events, records=pending)

    def add_scenarios(
        self,
        scenarios: Sequence[SaamScenario],
        records: Sequence[ProvenanceEvent],
        focus: str | None = None,
        transcript: bytes | None = None,
        activity: str = "evaluation",
    ) -> int:
        if not scenarios:
            raise InvalidPayload("no scenarios to record")
        with self._write_lock():
            state, events, pending = self._enter(Phase.EVALUATION)
            state = replace(state, scenarios=state.scenarios + tuple(scenarios))
            events.append(
                {
                    "event": "scenarios_added",
                    "scenarios": [s.to_dict() for s in scenarios],
                    "focus": focus,
                }
            )
            pending.extend(records)
            self._write_scenarios(state)
            if transcript is not None:
                pending.append(self._store_transcript(activity, transcript))
            return self._apply(state, events=events, records=pending)

    def add_report(self, report: EvaluationReport, markdown: str) -> tuple[str, int]:
        with self._write_lock():
            state, events, pending = self._enter(Phase.EVALUATION)
            report_id = f"report-{len(state.reports) + 1}"
            state = replace(
                state, reports=state.reports + (StoredReport(id=report_id, report=report),)
            )
            payload = report.to_dict()
            (self.root / REPORTS_DIR / f"{report_id}.json").write_text(
                _dump_json(payload), encoding="utf-8"
            )
            (self.root / REPORTS_DIR / f"{report_id}.md").write_text(
                markdown, encoding="utf-8"
            )
            events.append({"event": "report_added", "id": report_id, "report": payload})
            pending.append(
                ProvenanceEvent(
                    artifact_ref=ArtifactRef(kind=ArtifactKind.REPORT, id=report_id),
                    origin=Origin.ARCHITECT,
                )
            )
            state, step_events, step_records = self._step(state, Phase.REPORTED)
            events.extend(step_events)
            pending.extend(step_records)
            return report_id, self._apply(state, events=events, records=pending)

    def save_transcript(self, activity: str, data: bytes) -> tuple[str, int]:
        with self._write_lock():
            record = self._store_transcript(activity, data)
            name = record.artifact_ref.id
            return name, self._apply(self.state, events=[], records=[record])

    # -- reads

    def model_revision(self, rev_id: str) -> ModelRevision:
        for revision in self.state.models:
            if revision.id == rev_id:
                return revision
        raise UnknownArtifact("model revision", rev_id)

    def report(self, report_id: str) -> StoredReport:
        for stored in self.state.reports:
            if stored.id == report_id:
                return stored
        raise UnknownArtifact("report", report_id)

    def report_markdown(self, report_id: str) -> str:
        self.report(report_id)
        return (self.root / REPORTS_DIR / f"{report_id}.md").read_text(encoding="utf-8")

    def transcript(self, name: str) -> bytes:
        if name not in self.transcript_names:
            raise UnknownArtifact("transcript", name)
        return (self.root / TRANSCRIPTS_DIR / f"{name}.jsonl").read_bytes()

    def provenance_summary(self) -> ProvenanceSummary:
        return provenance_summary(self.entries)

    def ensure_can_enter(self, target: Phase) -> None:
        """Raise the error a mutation aimed at this phase would raise.

        Lets callers fail fast before spending a backend round trip.
        """
        reason = entry_gate(self.state, target)
        if reason is not None:
            raise GateUnsatisfied(reason)
        if (
            self.state.phase is not target
            and (self.state.phase, target) not in ALLOWED_TRANSITIONS
        ):
            raise IllegalTransition(self.state.phase.value, target.value)

    def next_transcript_name(self, activity: str) -> str:
        prefix = f"{activity}-"
        nth = sum(1 for n in self.transcript_names if n.startswith(prefix)) + 1
        return f"{activity}-{nth}"

    # -- internals

    def _enter(
        self, target: Phase
    ) -> tuple[ProjectState, list[dict[str, Any]], list[ProvenanceEvent]]:
        """Command-style entry: gate errors win over missing edges."""
        reason = entry_gate(self.state, target)
        if reason is not None:
            raise GateUnsatisfied(reason)
        if self.state.phase is target:
            return self.state, [], []
        return self._step(self.state, target)

    def _step(
        self, state: ProjectState, to: Phase
    ) -> tuple[ProjectState, list[dict[str, Any]], list[ProvenanceEvent]]:
        origin = state.phase
        moved = transition_state(state, to)
        event = {"event": "transition", "from": origin.value, "to": to.value}
        record = ProvenanceEvent(
            artifact_ref=ArtifactRef(
                kind=ArtifactKind.SESSION,
                id=state.id,
                field=f"transition:{origin.value}->{to.value}",
            ),
            origin=Origin.ARCHITECT,
        )
        return moved, [event], [record]

    def _store_transcript(self, activity: str, data: bytes) -> ProvenanceEvent:
        name = self.next_transcript_name(activity)
        (self.root / TRANSCRIPTS_DIR / f"{name}.jsonl").write_bytes(data)
        self.transcript_names = self.transcript_names + (name,)
        return ProvenanceEvent(
            artifact_ref=ArtifactRef(kind=ArtifactKind.TRANSCRIPT, id=name),
            origin=Origin.MERGED,
        )

    def _apply(
        self,
        state: ProjectState,
        events: Sequence[Mapping[str, Any]],
        records: Sequence[ProvenanceEvent],
    ) -> int:
        self.state = state
        self._write_project_file()
        if events:
            with (self.root / EVENTS_FILE).open("a", encoding="utf-8") as handle:
                for event in events:
                    handle.write(
                        canonical_json({"schema_version": SCHEMA_VERSION, **event}) + "\n"
                    )
        if records:
            appended: list[LedgerEntry] = []
            entries = self.entries
            for pending in records:
                sequenced = pending.sequenced(
                    seq=len(entries) + 1, timestamp=self.clock.now()
                )
                entries = append_provenance(entries, sequenced)
                appended.append(entries[-1])
            self.entries = entries
            with (self.root / LEDGER_FILE).open("a", encoding="utf-8") as handle:
                handle.write(serialize_ledger(appended))
        return self.entries[-1].record.seq if self.entries else 0

    def _write_project_file(self) -> None:
        payload = {
            "schema_version": SCHEMA_VERSION,
            "id": self.state.id,
            "phase": self.state.phase.value,
            "revision": self.state.revision,
            "model_revisions": [
                {"id": m.id, "diagram_kind": m.diagram_kind.value}
                for m in self.state.models
            ],
            "reports": [r.id for r in self.state.reports],
            "transcripts": list(self.transcript_names),
        }
        (self.root / PROJECT_FILE).write_text(_dump_json(payload), encoding="utf-8")

    def _write_asrs(self, state: ProjectState) -> None:
        payload = {
            "schema_version": SCHEMA_VERSION,
            "asrs": [a.to_dict() for a in state.asrs],
        }
        (self.root / ASRS_FILE).write_text(_dump_json(payload), encoding="utf-8")

    def _write_scenarios(self, state: ProjectState) -> None:
        payload = {
            "schema_version": SCHEMA_VERSION,
            "scenarios": [s.to_dict() for s in state.scenarios],
        }
        (self.root / SCENARIOS_FILE).write_text(_dump_json(payload), encoding="utf-8")


def rebuild(root: Path) -> ProjectState:
    """Re-derive the project state from the event log alone."""
    events_path = Path(root) / EVENTS_FILE
    if not events_path.exists():
        raise UnknownProject(f"no event log at {events_path}")
    events = []
    with events_path.open(encoding="utf-8") as handle:
        for line in handle:
            if line.strip():
                events.append(json.loads(line))
    return replay_events(events)
