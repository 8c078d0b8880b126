"""Operations shared by the command line and the HTTP service.

Both front ends resolve a backend, call an engine function, and commit
the outcome through the project store. Keeping that sequence here means
a session driven over HTTP writes byte-for-byte the same project
directory as the same session driven from the shell.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path
from typing import Any, Mapping, Sequence

from . import analysis, evaluation, synthesis
from .backends import ChatBackend, LiveBackend
from .checks import check_singleton, check_tactic
from .config import Config
from .errors import InvalidPayload, PreconditionFailed, UnknownArtifact, UsageError
from .gateway import (
    Activity,
    Clock,
    SessionTranscript,
    SystemClock,
    TickClock,
    load_fixture,
    record,
    replay,
    send_turn,
    variance_probe,
)
from .model import (
    KNOWN_ANNOTATION_KEYS,
    ArchitectureStory,
    DiagramKind,
    ModelGraph,
)
from .project import Phase, ProjectStore, parse_story
from .prompts import PromptRegistry

FIXTURE_PACKAGE = "coarch"
FIXTURE_DIR = "fixtures"


def registry_for(config: Config) -> PromptRegistry:
    if config.prompts_dir:
        return PromptRegistry.load(Path(config.prompts_dir))
    return PromptRegistry.load()


def packaged_fixture(name: str) -> bytes | None:
    ref = resources.files(FIXTURE_PACKAGE) / FIXTURE_DIR / f"{name}.jsonl"
    return ref.read_bytes() if ref.is_file() else None


def fixture_bytes(name: str, search_dir: Path | None = None) -> bytes:
    """Locate a replay fixture: packaged set first, then the filesystem."""
    data = packaged_fixture(name)
    if data is not None:
        return data
    candidates = [Path(name), Path(f"{name}.jsonl")]
    if search_dir is not None:
        candidates += [
            search_dir / name,
            search_dir / f"{name}.jsonl",
            search_dir / "transcripts" / f"{name}.jsonl",
        ]
    for candidate in candidates:
        if candidate.is_file():
            return candidate.read_bytes()
    raise UsageError(f"no replay fixture named {name!r}")


def _consumed_exchanges(store: ProjectStore, descriptor: str) -> int:
    """How many fixture exchanges the project's transcripts already hold."""
    total = 0
    for name in store.transcript_names:
        recorded = load_fixture(store.transcript(name))
        if recorded.backend_descriptor == descriptor:
            total += len(recorded.exchanges())
    return total


def resolve_backend(
    descriptor: str,
    config: Config,
    search_dir: Path | None = None,
    store: ProjectStore | None = None,
) -> ChatBackend:
    if descriptor == "live":
        if not config.live_api_key:
            raise UsageError(
                "live backend requires an API key (set COARCH_LIVE_API_KEY)"
            )
        return LiveBackend(
            base_url=config.live_base_url,
            api_key=config.live_api_key,
            model=config.live_model,
        )
    if descriptor.startswith("replay:"):
        name = descriptor.partition(":")[2]
        if not name:
            raise UsageError("replay backend needs a fixture name: replay:<name>")
        # Resume where earlier commands left off, so one recorded session
        # replays across separate process invocations.
        cursor = 0
        if store is not None:
            cursor = _consumed_exchanges(store, f"replay:{name}")
        return replay(fixture_bytes(name, search_dir), name, cursor=cursor)
    raise UsageError(
        f"unknown backend descriptor {descriptor!r} (use 'live' or 'replay:<name>')"
    )


def clock_for(backend: ChatBackend) -> Clock:
    # Deterministic backends get deterministic transcript timestamps.
    return TickClock() if backend.deterministic else SystemClock()


def _fresh_transcript(store: ProjectStore, activity: str, backend: ChatBackend) -> SessionTranscript:
    return SessionTranscript(
        session_id=store.next_transcript_name(activity),
        backend_descriptor=backend.descriptor,
    )


def _current_graph(store: ProjectStore) -> ModelGraph:
    revision = store.state.latest_model()
    if revision is None:
        raise PreconditionFailed("no model revision yet; run synthesize first")
    return revision.graph()


# ---------------------------------------------------------------------------
# Payload builders


def status_payload(store: ProjectStore) -> dict[str, Any]:
    state = store.state
    return {
        "id": state.id,
        "phase": state.phase.value,
        "revision": state.revision,
        "story_imported": state.story is not None,
        "asr_count": len(state.asrs),
        "model_revisions": [m.id for m in state.models],
        "scenario_count": len(state.scenarios),
        "reports": [r.id for r in state.reports],
        "transcripts": list(store.transcript_names),
        "ledger_length": len(store.entries),
    }


def story_payload(store: ProjectStore) -> dict[str, Any]:
    if store.state.story is None:
        raise UnknownArtifact("story", "current")
    return {"story": store.state.story.to_dict()}


def scenario_listing(store: ProjectStore) -> dict[str, Any]:
    return {"scenarios": [s.to_dict() for s in store.state.scenarios]}


def transcript_listing(store: ProjectStore) -> dict[str, Any]:
    return {
        "transcripts": [
            {"id": name, "turns": transcript_turns(store, name)}
            for name in store.transcript_names
        ]
    }


def asr_listing(store: ProjectStore) -> dict[str, Any]:
    findings = analysis.lint_asrs(store.state.asrs)
    return {
        "asrs": [a.to_dict() for a in store.state.asrs],
        "lint_findings": [f.to_dict() for f in findings],
    }


def ledger_payload(store: ProjectStore) -> list[dict[str, Any]]:
    return [entry.to_dict() for entry in store.entries]


# ---------------------------------------------------------------------------
# Operations


def load_story_file(path: Path) -> ArchitectureStory:
    if not path.is_file():
        raise UsageError(f"story file not found: {path}")
    text = path.read_text(encoding="utf-8")
    if path.suffix == ".json":
        return ArchitectureStory.from_dict(json.loads(text))
    return parse_story(text)


def import_story(store: ProjectStore, story: ArchitectureStory) -> dict[str, Any]:
    seq = store.import_story(story)
    assert store.state.story is not None
    return {"story": store.state.story.to_dict(), "seq": seq}


def run_analysis(
    store: ProjectStore, backend: ChatBackend, registry: PromptRegistry
) -> dict[str, Any]:
    store.ensure_can_enter(Phase.ANALYSIS)
    assert store.state.story is not None
    transcript = _fresh_transcript(store, "analysis", backend)
    result = analysis.extract_asrs(
        store.state.story,
        transcript,
        backend,
        clock_for(backend),
        registry,
        existing=store.state.asrs,
    )
    seq = store.propose_asrs(
        result.asrs,
        result.events,
        transcript=record(result.transcript, registry.registry_hash()),
        activity="analysis",
    )
    return {
        "proposed": [a.to_dict() for a in result.asrs],
        "transcript": transcript.session_id,
        "seq": seq,
        **asr_listing(store),
    }


def apply_refinement(
    store: ProjectStore, op: analysis.RefinementOp | Mapping[str, Any]
) -> dict[str, Any]:
    if not isinstance(op, analysis.RefinementOp):
        op = analysis.RefinementOp.from_dict(op)
    seq = store.apply_refinement(op)
    return {"seq": seq, **asr_listing(store)}


def accept_requirements(store: ProjectStore, ids: Sequence[str]) -> dict[str, Any]:
    seq = store.accept_asrs(list(ids))
    return {"seq": seq, **asr_listing(store)}


def run_synthesis(
    store: ProjectStore,
    diagram_kind: DiagramKind,
    backend: ChatBackend,
    registry: PromptRegistry,
) -> dict[str, Any]:
    store.ensure_can_enter(Phase.SYNTHESIS)
    transcript = _fresh_transcript(store, "synthesis", backend)
    result = synthesis.synthesize_script(
        store.state.asrs,
        diagram_kind,
        transcript,
        backend,
        clock_for(backend),
        registry,
    )
    rev_id, seq = store.add_model_revision(
        diagram_kind,
        result.script.text,
        turn_ref=result.turn_ref,
        transcript=record(result.transcript, registry.registry_hash()),
        activity="synthesis",
    )
    return {
        "revision": {
            "id": rev_id,
            "diagram_kind": diagram_kind.value,
            "script": result.script.text,
        },
        "seq": seq,
    }


def run_check(store: ProjectStore, pattern: str, element: str) -> dict[str, Any]:
    graph = _current_graph(store)
    if pattern == "singleton":
        result = check_singleton(graph, element)
    elif pattern in KNOWN_ANNOTATION_KEYS:
        result = check_tactic(graph, element, pattern)
    else:
        expected = ", ".join(sorted(KNOWN_ANNOTATION_KEYS))
        raise UsageError(f"unknown check {pattern!r} (expected one of: {expected})")
    return result.to_dict()


def trace_matrix(store: ProjectStore) -> dict[str, Any]:
    """ASR-to-element links, harvested from scenario citations.

    A scenario links every requirement it cites to every element it
    touches. Citations pointing at elements absent from the current
    model revision are dropped rather than flagged, since the model may
    have been re-synthesized after the scenario was written.
    """
    graph = _current_graph(store)
    known_asrs = {a.id for a in store.state.asrs}
    links = set()
    for scenario in store.state.scenarios:
        for asr_id in scenario.source_asrs:
            if asr_id not in known_asrs:
                continue
            for element in scenario.affected_elements:
                if graph.element(element) is not None:
                    links.add((asr_id, element))
    matrix = synthesis.build_traceability(store.state.asrs, graph, links)
    return matrix.to_dict()


def run_scenarios(
    store: ProjectStore,
    backend: ChatBackend,
    registry: PromptRegistry,
    focus: str | None = None,
) -> dict[str, Any]:
    store.ensure_can_enter(Phase.EVALUATION)
    graph = _current_graph(store)
    transcript = _fresh_transcript(store, "evaluation", backend)
    result = evaluation.elicit_scenarios(
        store.state.asrs,
        graph,
        transcript,
        backend,
        clock_for(backend),
        registry,
        focus=focus,
        existing=store.state.scenarios,
    )
    classified = tuple(
        evaluation.classify_scenario(s, graph) for s in result.scenarios
    )
    seq = store.add_scenarios(
        classified,
        result.events,
        focus=focus,
        transcript=record(result.transcript, registry.registry_hash()),
        activity="evaluation",
    )
    return {"scenarios": [s.to_dict() for s in classified], "seq": seq}


def run_freeform(
    store: ProjectStore,
    content: str,
    backend: ChatBackend,
    registry: PromptRegistry,
) -> dict[str, Any]:
    """One free-form architect/bot exchange, persisted as a transcript.

    Free-form turns produce no artifacts, only conversation; anything
    the architect wants kept must go through a refinement or one of the
    phase operations.
    """
    if not content.strip():
        raise InvalidPayload("turn content is empty")
    transcript = _fresh_transcript(store, "freeform", backend)
    _, transcript = send_turn(
        transcript,
        content,
        Activity.FREEFORM,
        backend,
        clock_for(backend),
        registry=registry,
    )
    name, seq = store.save_transcript(
        "freeform", record(transcript, registry.registry_hash())
    )
    return {
        "transcript": name,
        "turns": [turn.to_dict() for turn in transcript.turns],
        "seq": seq,
    }


def transcript_turns(store: ProjectStore, name: str) -> list[dict[str, Any]]:
    return [turn.to_dict() for turn in load_fixture(store.transcript(name)).turns]


def run_evaluation(store: ProjectStore) -> dict[str, Any]:
    store.ensure_can_enter(Phase.EVALUATION)
    matrix = evaluation.interaction_matrix(store.state.scenarios)
    report = evaluation.evaluate(store.state.asrs, store.state.scenarios, matrix)
    report_id, seq = store.add_report(report, evaluation.report_markdown(report))
    return {"report_id": report_id, "report": report.to_dict(), "seq": seq}


def latest_report(store: ProjectStore) -> dict[str, Any]:
    stored = store.state.latest_report()
    if stored is None:
        raise UnknownArtifact("report", "latest")
    return {
        "report_id": stored.id,
        "report": stored.report.to_dict(),
        "markdown": store.report_markdown(stored.id),
    }


def run_probe(prompt: str, n: int, backend: ChatBackend) -> dict[str, Any]:
    if n < 1:
        raise UsageError("probe needs --n >= 1")
    return variance_probe(prompt, n, backend).to_dict()


def describe_fixture(data: bytes, name: str) -> dict[str, Any]:
    recorded = load_fixture(data)
    return {
        "name": name,
        "session_id": recorded.session_id,
        "backend_descriptor": recorded.backend_descriptor,
        "prompt_registry_hash": recorded.prompt_registry_hash,
        "turns": [turn.to_dict() for turn in recorded.turns],
    }
