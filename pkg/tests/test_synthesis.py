"""Script synthesis and requirement traceability."""

from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

import strategies as strat
from coarch.backends import ScriptedBackend
from coarch.errors import (
    PreconditionFailed,
    UnknownAsr,
    UnknownElement,
    UnparseableScript,
)
from coarch.gateway import SessionTranscript, TickClock
from coarch.model import (
    Asr,
    AsrKind,
    AsrStatus,
    Comparator,
    DiagramKind,
    QuantifiedCriterion,
)
from coarch.synthesis import build_traceability, synthesize_script
from coarch.prompts import PromptRegistry
from coarch.uml import parse_source, pretty_print

REGISTRY = PromptRegistry.load()

ACCEPTED = (
    Asr(
        id="ASR-001",
        kind=AsrKind.QUALITY,
        statement="view bikes nearby and reserve quickly",
        criterion=QuantifiedCriterion("response_time_seconds", Comparator.LE, 90),
        status=AsrStatus.ACCEPTED,
    ),
    Asr(
        id="ASR-002",
        kind=AsrKind.FUNCTIONALITY,
        statement="one login session per user",
        status=AsrStatus.ACCEPTED,
    ),
    Asr(
        id="ASR-003",
        kind=AsrKind.CONSTRAINT,
        statement="apply data minimization on registration data",
        tags=("GDPR",),
        status=AsrStatus.ACCEPTED,
    ),
)

SCRIPT_REPLY = """Here is the design.
```plantuml
@startuml
class UserLogin <<singleton>> {
  -UserLogin()
  {static} +getInstance()
}
class ViewBikes <<cached>> {
  +listNearby()
}
class UserLocation <<data_minimized>> {
  -coordinates
}
UserLogin --> ViewBikes
ViewBikes --> UserLocation
@enduml
```
"""

BROKEN_REPLY = "```plantuml\n@startuml\nclass A junk\n@enduml\n```"


def run_synthesize(backend, asrs=ACCEPTED):
    return synthesize_script(
        asrs,
        DiagramKind.CLASS,
        SessionTranscript(session_id="s1", backend_descriptor=backend.descriptor),
        backend,
        TickClock(),
        REGISTRY,
    )


class TestSynthesizeScript:
    def test_campusbike_elements_come_through(self):
        result = run_synthesize(ScriptedBackend([SCRIPT_REPLY]))
        assert result.graph.element_names() == [
            "UserLogin",
            "ViewBikes",
            "UserLocation",
        ]
        assert result.script.diagram_kind is DiagramKind.CLASS

    def test_script_is_stored_in_normal_form(self):
        result = run_synthesize(ScriptedBackend([SCRIPT_REPLY]))
        assert result.script.text == pretty_print(result.graph)
        reparsed = parse_source(result.script.text, DiagramKind.CLASS)
        assert reparsed == result.graph

    def test_requires_an_accepted_asr(self):
        proposed = tuple(
            Asr(id=a.id, kind=a.kind, statement=a.statement, criterion=a.criterion, tags=a.tags)
            for a in ACCEPTED
        )
        with pytest.raises(PreconditionFailed):
            run_synthesize(ScriptedBackend([SCRIPT_REPLY]), asrs=proposed)
        with pytest.raises(PreconditionFailed):
            run_synthesize(ScriptedBackend([SCRIPT_REPLY]), asrs=())

    def test_repair_round_quotes_the_parse_error(self):
        backend = ScriptedBackend([BROKEN_REPLY, SCRIPT_REPLY])
        result = run_synthesize(backend)
        assert len(result.graph.elements) == 3
        repair_prompt = backend.calls[1][-1].content
        assert "line 2" in repair_prompt
        assert len(result.transcript.turns) == 4

    def test_two_broken_scripts_fail(self):
        backend = ScriptedBackend([BROKEN_REPLY, "no fence at all"])
        with pytest.raises(UnparseableScript):
            run_synthesize(backend)

    def test_reply_without_fence_gets_repair_round(self):
        backend = ScriptedBackend(["@startuml\nclass A\n@enduml", SCRIPT_REPLY])
        result = run_synthesize(backend)
        assert len(result.graph.elements) == 3

    def test_turn_ref_points_at_the_successful_bot_turn(self):
        result = run_synthesize(ScriptedBackend([SCRIPT_REPLY]))
        assert result.turn_ref == "s1#2"

    def test_only_accepted_asrs_enter_the_prompt(self):
        rejected = Asr(
            id="ASR-009",
            kind=AsrKind.FUNCTIONALITY,
            statement="forgotten idea",
            status=AsrStatus.REJECTED,
        )
        backend = ScriptedBackend([SCRIPT_REPLY])
        run_synthesize(backend, asrs=(*ACCEPTED, rejected))
        prompt = backend.calls[0][-1].content
        assert "ASR-001" in prompt
        assert "forgotten idea" not in prompt


MODEL = parse_source(
    "@startuml\nclass UserLogin\nclass ViewBikes\nclass UserLocation\n@enduml\n",
    DiagramKind.CLASS,
)


class TestBuildTraceability:
    def test_full_cover_has_no_gaps(self):
        links = [
            ("ASR-001", "ViewBikes"),
            ("ASR-002", "UserLogin"),
            ("ASR-003", "UserLocation"),
        ]
        matrix = build_traceability(ACCEPTED, MODEL, links)
        assert matrix.uncovered_asrs == ()
        assert matrix.unmotivated_elements == ()
        assert matrix.links == tuple(sorted(links))

    def test_unlinked_accepted_asr_is_uncovered(self):
        matrix = build_traceability(ACCEPTED, MODEL, [("ASR-002", "UserLogin")])
        assert matrix.uncovered_asrs == ("ASR-001", "ASR-003")
        assert matrix.unmotivated_elements == ("UserLocation", "ViewBikes")

    def test_link_to_absent_element(self):
        with pytest.raises(UnknownElement):
            build_traceability(ACCEPTED, MODEL, [("ASR-001", "Ghost")])

    def test_link_to_absent_asr(self):
        with pytest.raises(UnknownAsr):
            build_traceability(ACCEPTED, MODEL, [("ASR-404", "UserLogin")])

    def test_non_accepted_asrs_are_linkable_but_not_required(self):
        proposed = Asr(id="ASR-010", kind=AsrKind.FUNCTIONALITY, statement="x")
        matrix = build_traceability(
            (*ACCEPTED, proposed),
            MODEL,
            [
                ("ASR-001", "ViewBikes"),
                ("ASR-002", "UserLogin"),
                ("ASR-003", "UserLocation"),
                ("ASR-010", "UserLogin"),
            ],
        )
        assert matrix.uncovered_asrs == ()

    def test_duplicate_links_collapse(self):
        matrix = build_traceability(
            ACCEPTED, MODEL, [("ASR-001", "ViewBikes")] * 3
        )
        assert matrix.links == (("ASR-001", "ViewBikes"),)

    @given(strat.script_graphs(min_elements=1), st.data())
    def test_link_conservation(self, graph, data):
        names = graph.element_names()
        links = data.draw(
            st.lists(
                st.tuples(
                    st.sampled_from([a.id for a in ACCEPTED]), st.sampled_from(names)
                ),
                max_size=8,
            )
        )
        matrix = build_traceability(ACCEPTED, graph, links)
        per_asr = {}
        per_element = {}
        for asr_id, element in matrix.links:
            per_asr[asr_id] = per_asr.get(asr_id, 0) + 1
            per_element[element] = per_element.get(element, 0) + 1
        assert sum(per_asr.values()) == len(matrix.links)
        assert sum(per_element.values()) == len(matrix.links)
        assert set(matrix.uncovered_asrs) == {
            a.id for a in ACCEPTED if a.id not in per_asr
        }
        assert set(matrix.unmotivated_elements) == set(names) - set(per_element)
