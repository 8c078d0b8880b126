"""Architectural synthesis: diagram scripts from accepted requirements.

The bot writes a script in the strict diagram dialect; this module
extracts it from the reply, parses it, re-asks once with the exact
parse error quoted, and normalizes the accepted script through the
pretty printer so every stored revision is in normal form. It also
maintains the requirement-to-element traceability matrix.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Any, Iterable, Sequence

from .analysis import asr_lines
from .backends import ChatBackend
from .errors import (
    CoarchError,
    DuplicateElement,
    PreconditionFailed,
    UmlSyntaxError,
    UnknownAsr,
    UnknownElement,
    UnparseableScript,
)
from .gateway import Activity, Clock, SessionTranscript, send_turn
from .model import Asr, AsrStatus, DiagramKind, ModelGraph
from .prompts import PromptRegistry, render_prompt
from .uml import UmlScript, parse_source, pretty_print

_FENCE_RE = re.compile(r"```[a-z0-9_-]*[ \t]*\n(.*?)```", re.DOTALL)


@dataclass(frozen=True)
class SynthesisResult:
    script: UmlScript
    graph: ModelGraph
    transcript: SessionTranscript
    turn_ref: str


@dataclass(frozen=True)
class TraceabilityMatrix:
    """Requirement-to-element links plus both kinds of gap."""

    links: tuple[tuple[str, str], ...]
    uncovered_asrs: tuple[str, ...]
    unmotivated_elements: tuple[str, ...]

    def to_dict(self) -> dict[str, Any]:
        return {
            "links": [list(link) for link in self.links],
            "uncovered_asrs": list(self.uncovered_asrs),
            "unmotivated_elements": list(self.unmotivated_elements),
        }


class _FenceProblem(Exception):
    pass


def _extract_fenced_script(reply: str) -> str:
    blocks = _FENCE_RE.findall(reply)
    if len(blocks) != 1:
        raise _FenceProblem(f"expected exactly one fenced script block, found {len(blocks)}")
    return blocks[0]


def synthesize_script(
    asrs: Sequence[Asr],
    diagram_kind: DiagramKind,
    transcript: SessionTranscript,
    backend: ChatBackend,
    clock: Clock,
    registry: PromptRegistry,
) -> SynthesisResult:
    """Obtain a parseable script for the accepted requirements.

    One automatic re-ask quotes the parse error verbatim; a second
    failure surfaces as UnparseableScript. The returned script text is
    the pretty-printed normal form of the parsed graph.
    """

    accepted = [a for a in asrs if a.status is AsrStatus.ACCEPTED]
    if not accepted:
        raise PreconditionFailed("synthesis requires at least one accepted ASR")
    prompt = render_prompt(
        registry.get("synthesis"),
        {
            "diagram_kind": diagram_kind.value.replace("_", " "),
            "asrs": asr_lines(accepted),
        },
    )
    bot, transcript = send_turn(
        transcript, prompt, Activity.SYNTHESIS, backend, clock, registry=registry
    )
    try:
        graph = _parse_reply(bot.content, diagram_kind)
    except (UmlSyntaxError, DuplicateElement, _FenceProblem) as first:
        error = first.message if isinstance(first, CoarchError) else str(first)
        repair = render_prompt(registry.get("synthesis_repair"), {"error": error})
        bot, transcript = send_turn(
            transcript, repair, Activity.SYNTHESIS, backend, clock, registry=registry
        )
        try:
            graph = _parse_reply(bot.content, diagram_kind)
        except (UmlSyntaxError, DuplicateElement, _FenceProblem) as second:
            message = second.message if isinstance(second, CoarchError) else str(second)
            raise UnparseableScript(
                f"script failed to parse after a repair round: {message}"
            ) from second
    text = pretty_print(graph)
    return SynthesisResult(
        script=UmlScript(text=text, diagram_kind=diagram_kind),
        graph=graph,
        transcript=transcript,
        turn_ref=f"{transcript.session_id}#{bot.id}",
    )


def _parse_reply(reply: str, diagram_kind: DiagramKind) -> ModelGraph:
    return parse_source(_extract_fenced_script(reply), diagram_kind)


def build_traceability(
    asrs: Sequence[Asr],
    model: ModelGraph,
    links: Iterable[tuple[str, str]],
) -> TraceabilityMatrix:
    """Fold (asr id, element) links into the traceability matrix.

    Uncovered means an accepted requirement with no link; unmotivated
    means a model element no requirement points at.
    """

    known_asrs = {a.id for a in asrs}
    known_elements = set(model.element_names())
    unique = sorted(set(tuple(link) for link in links))
    for asr_id, element in unique:
        if asr_id not in known_asrs:
            raise UnknownAsr(asr_id)
        if element not in known_elements:
            raise UnknownElement(element)
    linked_asrs = {asr_id for asr_id, _ in unique}
    linked_elements = {element for _, element in unique}
    uncovered = sorted(
        a.id
        for a in asrs
        if a.status is AsrStatus.ACCEPTED and a.id not in linked_asrs
    )
    unmotivated = sorted(known_elements - linked_elements)
    return TraceabilityMatrix(
        links=tuple(unique),
        uncovered_asrs=tuple(uncovered),
        unmotivated_elements=tuple(unmotivated),
    )
