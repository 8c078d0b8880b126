"""Scenario-based architecture evaluation.

Scenarios are elicited through the bot, classified direct or indirect
against the model graph, folded into a scenario/element interaction
matrix with hotspot detection, and condensed into per-requirement
verdicts. The direct/indirect rule: a scenario is direct when the
current architecture supports it without change, which this module
codifies as "every consecutive pair of affected elements is related".
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, replace
from typing import Any, Mapping, Sequence

from .analysis import asr_lines
from .backends import ChatBackend
from .errors import (
    DanglingAsrReference,
    UnclassifiedScenario,
    UnknownElement,
    UnparseableResponse,
)
from .gateway import Activity, Clock, SessionTranscript, send_turn
from .model import (
    ArtifactKind,
    ArtifactRef,
    Asr,
    AsrStatus,
    Classification,
    EvaluationReport,
    MatrixMark,
    ModelGraph,
    Origin,
    ProvenanceEvent,
    SaamScenario,
    ScenarioKind,
    Verdict,
    new_sequential_id,
)
from .prompts import PromptRegistry, render_prompt

HOTSPOT_THRESHOLD = 2

_SCENARIO_BLOCK_RE = re.compile(r"```scenario[ \t]*\n(.*?)```", re.DOTALL)
_MARKER = {Classification.DIRECT: "D", Classification.INDIRECT: "I"}


@dataclass(frozen=True)
class ElicitationResult:
    scenarios: tuple[SaamScenario, ...]
    transcript: SessionTranscript
    events: tuple[ProvenanceEvent, ...]


@dataclass(frozen=True)
class InteractionMatrix:
    marks: tuple[MatrixMark, ...]
    hotspots: tuple[str, ...]

    def to_dict(self) -> dict[str, Any]:
        return {
            "marks": [m.to_dict() for m in self.marks],
            "hotspots": list(self.hotspots),
        }


def parse_scenario_block(
    text: str,
    model: ModelGraph,
    asr_ids: Sequence[str],
    existing: Sequence[SaamScenario] = (),
    focus: str | None = None,
) -> tuple[SaamScenario, ...]:
    """Parse the bot's fenced scenario block, enforcing the contract.

    Element names must exist in the model, every scenario must cite at
    least one known ASR, and when a focus element is given the block
    must contain at least one individual scenario for it.
    """

    blocks = _SCENARIO_BLOCK_RE.findall(text)
    if len(blocks) != 1:
        raise UnparseableResponse(
            f"expected exactly one fenced scenario block, found {len(blocks)}"
        )
    known_elements = set(model.element_names())
    known_asrs = set(asr_ids)
    taken = [s.id for s in existing]
    scenarios = []
    for raw_line in blocks[0].splitlines():
        line = raw_line.strip()
        if not line:
            continue
        scenario = _parse_scenario_line(line, known_elements, known_asrs, taken)
        taken.append(scenario.id)
        scenarios.append(scenario)
    if not scenarios:
        raise UnparseableResponse("scenario block is empty")
    if focus is not None and not any(
        s.kind is ScenarioKind.INDIVIDUAL and s.affected_elements == (focus,)
        for s in scenarios
    ):
        raise UnparseableResponse(
            f"no individual scenario for focus element {focus!r}"
        )
    return tuple(scenarios)


def _parse_scenario_line(
    line: str,
    known_elements: set[str],
    known_asrs: set[str],
    taken: Sequence[str],
) -> SaamScenario:
    parts = [part.strip() for part in line.split("|")]
    if len(parts) != 4:
        raise UnparseableResponse(f"malformed scenario record: {line!r}")
    try:
        kind = ScenarioKind[parts[0].upper()]
    except KeyError:
        raise UnparseableResponse(f"unknown scenario kind: {parts[0]!r}") from None
    if not parts[1]:
        raise UnparseableResponse(f"empty scenario text: {line!r}")
    elements = _parse_kv_list(parts[2], "elements", line)
    asrs = _parse_kv_list(parts[3], "asrs", line)
    for element in elements:
        if element not in known_elements:
            raise UnparseableResponse(
                f"scenario names element {element!r} not in the model: {line!r}"
            )
    if not asrs:
        raise UnparseableResponse(f"scenario cites no ASR: {line!r}")
    for asr_id in asrs:
        if asr_id not in known_asrs:
            raise UnparseableResponse(
                f"scenario cites unknown ASR {asr_id!r}: {line!r}"
            )
    try:
        return SaamScenario(
            id=new_sequential_id("SCN", taken),
            text=parts[1],
            kind=kind,
            affected_elements=elements,
            source_asrs=asrs,
        )
    except ValueError as exc:
        raise UnparseableResponse(f"{exc}: {line!r}") from None


def _parse_kv_list(part: str, key: str, line: str) -> tuple[str, ...]:
    prefix = f"{key}="
    if not part.startswith(prefix):
        raise UnparseableResponse(f"expected '{prefix}...' in record: {line!r}")
    values = tuple(v.strip() for v in part[len(prefix) :].split(",") if v.strip())
    return values


def elicit_scenarios(
    asrs: Sequence[Asr],
    model: ModelGraph,
    transcript: SessionTranscript,
    backend: ChatBackend,
    clock: Clock,
    registry: PromptRegistry,
    *,
    focus: str | None = None,
    existing: Sequence[SaamScenario] = (),
) -> ElicitationResult:
    """Ask the bot for evaluation scenarios, re-asking once on failure."""

    if focus is not None and model.element(focus) is None:
        raise UnknownElement(focus)
    focus_clause = (
        f" Focus on the element {focus}: include at least one INDIVIDUAL "
        f"scenario whose only element is {focus}." if focus else ""
    )
    prompt = render_prompt(
        registry.get("evaluation"),
        {
            "focus_clause": focus_clause,
            "elements": ", ".join(model.element_names()) or "(none)",
            "asrs": asr_lines(asrs),
        },
    )
    asr_ids = [a.id for a in asrs]
    bot, transcript = send_turn(
        transcript, prompt, Activity.EVALUATION, backend, clock, registry=registry
    )
    try:
        scenarios = parse_scenario_block(bot.content, model, asr_ids, existing, focus)
    except UnparseableResponse as exc:
        repair = render_prompt(registry.get("evaluation_repair"), {"error": exc.message})
        bot, transcript = send_turn(
            transcript, repair, Activity.EVALUATION, backend, clock, registry=registry
        )
        scenarios = parse_scenario_block(bot.content, model, asr_ids, existing, focus)
    turn_ref = f"{transcript.session_id}#{bot.id}"
    events = tuple(
        ProvenanceEvent(
            artifact_ref=ArtifactRef(kind=ArtifactKind.SCENARIO, id=scenario.id),
            origin=Origin.BOT,
            turn_ref=turn_ref,
        )
        for scenario in scenarios
    )
    return ElicitationResult(scenarios=scenarios, transcript=transcript, events=events)


def classify_scenario(scenario: SaamScenario, model: ModelGraph) -> SaamScenario:
    """Set the scenario's classification against the model.

    An individual scenario on an existing element is direct. An
    interacting scenario is direct only when every consecutive pair on
    its interaction path is related in the model, in either direction.
    """

    for element in scenario.affected_elements:
        if model.element(element) is None:
            raise UnknownElement(element)
    path = scenario.affected_elements
    direct = all(model.related(a, b) for a, b in zip(path, path[1:]))
    classification = Classification.DIRECT if direct else Classification.INDIRECT
    return replace(scenario, classification=classification)


def interaction_matrix(
    scenarios: Sequence[SaamScenario], *, threshold: int = HOTSPOT_THRESHOLD
) -> InteractionMatrix:
    """Mark every (scenario, element) pair and flag indirect hotspots.

    Hotspots are elements touched by at least `threshold` indirect
    scenarios, sorted by descending count, then name.
    """

    marks = []
    indirect_counts: dict[str, int] = {}
    for scenario in scenarios:
        if scenario.classification is Classification.UNCLASSIFIED:
            raise UnclassifiedScenario(scenario.id)
        marker = _MARKER[scenario.classification]
        for element in scenario.affected_elements:
            marks.append(
                MatrixMark(scenario_id=scenario.id, element=element, marker=marker)
            )
            if scenario.classification is Classification.INDIRECT:
                indirect_counts[element] = indirect_counts.get(element, 0) + 1
    hotspots = sorted(
        (name for name, count in indirect_counts.items() if count >= threshold),
        key=lambda name: (-indirect_counts[name], name),
    )
    ordered = sorted(marks, key=lambda m: (m.scenario_id, m.element))
    return InteractionMatrix(marks=tuple(ordered), hotspots=tuple(hotspots))


def verdict_for(classifications: Sequence[Classification]) -> Verdict:
    """Fold a scenario classification multiset into one verdict."""

    if not classifications:
        return Verdict.UNKNOWN
    kinds = set(classifications)
    if kinds == {Classification.DIRECT}:
        return Verdict.SATISFIED
    if kinds == {Classification.INDIRECT}:
        return Verdict.UNSATISFIED
    return Verdict.PARTIAL


def evaluate(
    asrs: Sequence[Asr],
    scenarios: Sequence[SaamScenario],
    matrix: InteractionMatrix,
) -> EvaluationReport:
    """Produce the evaluation report.

    Verdicts cover every accepted requirement plus any live requirement
    a scenario cites; tombstones are never evaluated. Accepted
    requirements without scenarios land at Unknown and are called out
    in the summary.
    """

    known_ids = {a.id for a in asrs}
    by_asr: dict[str, list[Classification]] = {}
    for scenario in scenarios:
        if scenario.classification is Classification.UNCLASSIFIED:
            raise UnclassifiedScenario(scenario.id)
        for asr_id in scenario.source_asrs:
            if asr_id not in known_ids:
                raise DanglingAsrReference(scenario.id, asr_id)
            by_asr.setdefault(asr_id, []).append(scenario.classification)
    covered = {
        a.id
        for a in asrs
        if a.status is AsrStatus.ACCEPTED
        or (a.id in by_asr and a.status is not AsrStatus.REJECTED)
    }
    verdicts = tuple(
        (asr_id, verdict_for(by_asr.get(asr_id, []))) for asr_id in sorted(covered)
    )
    needs_scenarios = sorted(
        asr_id for asr_id, verdict in verdicts if verdict is Verdict.UNKNOWN
    )
    counts = {verdict: 0 for verdict in Verdict}
    for _, verdict in verdicts:
        counts[verdict] += 1
    summary = (
        f"{len(scenarios)} scenarios over {len(verdicts)} requirements: "
        f"{counts[Verdict.SATISFIED]} satisfied, {counts[Verdict.PARTIAL]} partial, "
        f"{counts[Verdict.UNSATISFIED]} unsatisfied, {counts[Verdict.UNKNOWN]} unknown."
    )
    if needs_scenarios:
        summary += " Needs scenarios: " + ", ".join(needs_scenarios) + "."
    return EvaluationReport(
        per_asr_verdicts=verdicts,
        interaction_matrix=matrix.marks,
        hotspots=matrix.hotspots,
        summary=summary,
    )


def report_json(report: EvaluationReport) -> str:
    return json.dumps(report.to_dict(), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def report_markdown(report: EvaluationReport) -> str:
    """Human-readable report: verdicts, matrix table, hotspots, summary."""

    lines = ["# Evaluation Report", "", report.summary, "", "## Verdicts", ""]
    lines.append("| ASR | Verdict |")
    lines.append("| --- | --- |")
    for asr_id, verdict in report.per_asr_verdicts:
        lines.append(f"| {asr_id} | {verdict.value} |")
    lines.extend(["", "## Interaction Matrix", ""])
    elements = sorted({m.element for m in report.interaction_matrix})
    scenario_ids = sorted({m.scenario_id for m in report.interaction_matrix})
    if elements:
        cells: Mapping[tuple[str, str], str] = {
            (m.scenario_id, m.element): m.marker for m in report.interaction_matrix
        }
        lines.append("| Scenario | " + " | ".join(elements) + " |")
        lines.append("| --- |" + " --- |" * len(elements))
        for scenario_id in scenario_ids:
            row = [cells.get((scenario_id, element), "") for element in elements]
            lines.append(f"| {scenario_id} | " + " | ".join(row) + " |")
    else:
        lines.append("(no scenarios)")
    lines.extend(["", "## Hotspots", ""])
    if report.hotspots:
        lines.extend(f"- {name}" for name in report.hotspots)
    else:
        lines.append("(none)")
    return "\n".join(lines) + "\n"
