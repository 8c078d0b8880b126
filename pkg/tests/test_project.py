"""Store behaviour: phase machine, persistence layout, events, provenance."""

import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

import strategies as strat
from coarch import project
from coarch.analysis import RefinementKind, RefinementOp
from coarch.errors import (
    GateUnsatisfied,
    IllegalTransition,
    InvalidPayload,
    PreconditionFailed,
    ProjectLocked,
    SchemaViolation,
    UnknownArtifact,
    UnknownProject,
)
from coarch.gateway import TickClock
from coarch.ledger import verify_ledger
from coarch.model import (
    ArchitectureStory,
    ArtifactKind,
    ArtifactRef,
    Asr,
    AsrKind,
    AsrStatus,
    Classification,
    EvaluationReport,
    Origin,
    ProvenanceEvent,
    QuantifiedCriterion,
    SaamScenario,
    ScenarioKind,
    ScenarioSketch,
    Verdict,
)
from coarch.model import Comparator, DiagramKind
from coarch.project import (
    ALLOWED_TRANSITIONS,
    Phase,
    ProjectState,
    ProjectStore,
    parse_story,
    provenance_summary,
    rebuild,
    replay_events,
    serialize_story,
    transition_state,
)

STORY = ArchitectureStory(
    id="campus-rides",
    narrative="Students rent shared bikes across campus.",
    scenarios=(
        ScenarioSketch(title="Reserve a bike", description="rider books the nearest one"),
        ScenarioSketch(title="Return a bike"),
    ),
    domain_tags=("mobility", "campus"),
)

SCRIPT = (
    "@startuml\n"
    "class UserLogin <<singleton>>\n"
    "class ViewBikes <<cached>>\n"
    "UserLogin --> ViewBikes\n"
    "@enduml\n"
)


def asr(asr_id: str, status: AsrStatus = AsrStatus.PROPOSED, kind: AsrKind = AsrKind.FUNCTIONALITY) -> Asr:
    return Asr(id=asr_id, kind=kind, statement=f"requirement {asr_id}", status=status)


def bot_event(kind: ArtifactKind, artifact_id: str) -> ProvenanceEvent:
    return ProvenanceEvent(
        artifact_ref=ArtifactRef(kind=kind, id=artifact_id),
        origin=Origin.BOT,
        turn_ref="s1#2",
    )


def scenario(scenario_id: str, element: str = "ViewBikes") -> SaamScenario:
    return SaamScenario(
        id=scenario_id,
        kind=ScenarioKind.INDIVIDUAL,
        text=f"scenario {scenario_id}",
        affected_elements=(element,),
        source_asrs=("ASR-001",),
        classification=Classification.DIRECT,
    )


def report_for(asr_ids: tuple[str, ...]) -> EvaluationReport:
    return EvaluationReport(
        per_asr_verdicts=tuple((i, Verdict.SATISFIED) for i in asr_ids),
        interaction_matrix=(),
        hotspots=(),
        summary="fine",
    )


def drive_full_session(root) -> ProjectStore:
    """Create a project and walk it through every phase once."""
    store = ProjectStore.create(root, "campus-rides", clock=TickClock())
    store.import_story(STORY)
    store.propose_asrs(
        [asr("ASR-001"), asr("ASR-002", kind=AsrKind.QUALITY)],
        [bot_event(ArtifactKind.ASR, "ASR-001"), bot_event(ArtifactKind.ASR, "ASR-002")],
        transcript=b'{"session_id": "s1"}\n',
    )
    store.apply_refinement(
        RefinementOp(
            op=RefinementKind.UPDATE,
            target="ASR-002",
            payload={
                "criterion": {"metric": "response_time_seconds", "comparator": "le", "value": 90}
            },
        )
    )
    store.accept_asrs(["ASR-001", "ASR-002"])
    store.add_model_revision(
        DiagramKind.CLASS,
        SCRIPT,
        turn_ref="s2#2",
        transcript=b'{"session_id": "s2"}\n',
    )
    store.add_scenarios(
        [scenario("SCN-001"), scenario("SCN-002", element="UserLogin")],
        [bot_event(ArtifactKind.SCENARIO, "SCN-001"), bot_event(ArtifactKind.SCENARIO, "SCN-002")],
        focus=None,
        transcript=b'{"session_id": "s3"}\n',
    )
    store.add_report(report_for(("ASR-001", "ASR-002")), "# Evaluation Report\n")
    return store


class TestStoryMarkdown:
    def test_serialize_then_parse_restores_the_story(self):
        assert parse_story(serialize_story(STORY)) == STORY

    def test_minimal_story(self):
        story = ArchitectureStory(id="s", narrative="just text")
        text = serialize_story(story)
        assert parse_story(text) == story
        assert "## Scenarios" not in text

    def test_description_may_contain_colons(self):
        story = ArchitectureStory(
            id="s",
            narrative="n",
            scenarios=(ScenarioSketch(title="Reserve", description="step: tap the pin"),),
        )
        assert parse_story(serialize_story(story)) == story

    @pytest.mark.parametrize(
        "story",
        [
            ArchitectureStory(id="s", narrative="n", scenarios=(ScenarioSketch(title="a: b"),)),
            ArchitectureStory(id="s", narrative="n", domain_tags=("x,y",)),
            ArchitectureStory(id="s", narrative="line\n## Scenarios\nmore"),
        ],
    )
    def test_markup_collisions_are_rejected(self, story):
        with pytest.raises(InvalidPayload):
            serialize_story(story)

    @pytest.mark.parametrize(
        "text",
        [
            "no heading\n",
            "# \n",
            "# s\n\n## Scenarios\n\nnot a bullet\n",
        ],
    )
    def test_malformed_story_files_are_rejected(self, text):
        with pytest.raises(SchemaViolation):
            parse_story(text)

    @given(
        story_id=strat.identifiers,
        narrative=strat.safe_notes,
        titles=st.lists(strat.identifiers, max_size=3, unique=True),
        tags=st.lists(strat.identifiers, max_size=3),
    )
    def test_round_trip_property(self, story_id, narrative, titles, tags):
        story = ArchitectureStory(
            id=story_id,
            narrative=narrative,
            scenarios=tuple(ScenarioSketch(title=t) for t in titles),
            domain_tags=tuple(tags),
        )
        assert parse_story(serialize_story(story)) == story


class TestPhaseMachine:
    def ready_state(self) -> ProjectState:
        return ProjectState(
            id="p",
            story=STORY,
            asrs=(asr("ASR-001", AsrStatus.ACCEPTED),),
            models=(project.ModelRevision("class_diagram-1", DiagramKind.CLASS, SCRIPT),),
            reports=(project.StoredReport("report-1", report_for(("ASR-001",))),),
        )

    def test_allowed_edge_increments_revision(self):
        state = self.ready_state()
        moved = transition_state(state, Phase.ANALYSIS)
        assert moved.phase is Phase.ANALYSIS
        assert moved.revision == state.revision + 1

    def test_missing_edge_beats_gate_failure(self):
        state = self.ready_state()
        with pytest.raises(IllegalTransition):
            transition_state(state, Phase.EVALUATION)

    def test_synthesis_gate(self):
        state = ProjectState(id="p", phase=Phase.ANALYSIS, story=STORY, asrs=(asr("ASR-001"),))
        with pytest.raises(GateUnsatisfied):
            transition_state(state, Phase.SYNTHESIS)

    def test_self_loops_are_not_edges(self):
        for phase in Phase:
            assert (phase, phase) not in ALLOWED_TRANSITIONS

    def test_every_pair_is_either_an_edge_or_rejected(self):
        state = self.ready_state()
        for source in Phase:
            for target in Phase:
                current = project.ProjectState(
                    id="p",
                    phase=source,
                    story=state.story,
                    asrs=state.asrs,
                    models=state.models,
                    reports=state.reports,
                )
                if (source, target) in ALLOWED_TRANSITIONS:
                    assert transition_state(current, target).phase is target
                else:
                    with pytest.raises(IllegalTransition):
                        transition_state(current, target)

    def test_every_phase_can_return_to_analysis(self):
        for phase in Phase:
            if phase is not Phase.ANALYSIS:
                assert (phase, Phase.ANALYSIS) in ALLOWED_TRANSITIONS


class TestLifecycle:
    def test_create_writes_the_initial_layout(self, tmp_path):
        ProjectStore.create(tmp_path / "p", "demo")
        root = tmp_path / "p"
        assert json.loads((root / "project.json").read_text())["phase"] == "story_capture"
        assert (root / "ledger.jsonl").read_text() == ""
        events = (root / "events.jsonl").read_text().splitlines()
        assert len(events) == 1
        assert json.loads(events[0])["event"] == "project_created"

    def test_create_twice_fails(self, tmp_path):
        ProjectStore.create(tmp_path, "demo")
        with pytest.raises(PreconditionFailed):
            ProjectStore.create(tmp_path, "demo")

    def test_open_missing_project(self, tmp_path):
        with pytest.raises(UnknownProject):
            ProjectStore.open(tmp_path / "absent")

    def test_fresh_ledger_is_empty(self, tmp_path):
        store = ProjectStore.create(tmp_path, "demo")
        assert store.entries == ()

    def test_open_restores_state_and_transcripts(self, tmp_path):
        store = drive_full_session(tmp_path)
        reopened = ProjectStore.open(tmp_path)
        assert reopened.state == store.state
        assert reopened.transcript_names == store.transcript_names
        assert reopened.entries == store.entries


class TestMutations:
    def test_full_session_walks_every_phase(self, tmp_path):
        store = drive_full_session(tmp_path)
        assert store.state.phase is Phase.REPORTED
        assert store.state.revision == 4
        assert [a.status for a in store.state.asrs] == [
            AsrStatus.ACCEPTED,
            AsrStatus.ACCEPTED,
        ]
        assert store.state.models[0].id == "class_diagram-1"
        assert [s.id for s in store.state.scenarios] == ["SCN-001", "SCN-002"]
        assert store.state.reports[0].id == "report-1"

    def test_ledger_sequence_of_full_session(self, tmp_path):
        store = drive_full_session(tmp_path)
        refs = [
            (e.record.artifact_ref.kind.value, e.record.origin.value)
            for e in store.entries
        ]
        assert refs == [
            ("story", "architect"),
            ("session", "architect"),
            ("asr", "bot"),
            ("asr", "bot"),
            ("transcript", "merged"),
            ("asr", "architect"),
            ("session", "architect"),
            ("session", "architect"),
            ("model", "bot"),
            ("transcript", "merged"),
            ("session", "architect"),
            ("scenario", "bot"),
            ("scenario", "bot"),
            ("transcript", "merged"),
            ("report", "architect"),
            ("session", "architect"),
        ]
        verify_ledger(store.entries)

    def test_mutations_return_growing_ledger_seq(self, tmp_path):
        store = ProjectStore.create(tmp_path, "demo", clock=TickClock())
        first = store.import_story(STORY)
        second = store.propose_asrs([asr("ASR-001")], [bot_event(ArtifactKind.ASR, "ASR-001")])
        assert first == 1
        assert second > first

    def test_artifact_files_match_state(self, tmp_path):
        store = drive_full_session(tmp_path)
        asrs_data = json.loads((tmp_path / "asrs.json").read_text())
        assert [a["id"] for a in asrs_data["asrs"]] == ["ASR-001", "ASR-002"]
        assert (tmp_path / "models" / "class_diagram-1.puml").read_text() == SCRIPT
        scenario_data = json.loads((tmp_path / "scenarios.json").read_text())
        assert len(scenario_data["scenarios"]) == 2
        report_payload = json.loads((tmp_path / "reports" / "report-1.json").read_text())
        assert report_payload == store.state.reports[0].report.to_dict()
        assert (tmp_path / "reports" / "report-1.md").read_text().startswith("# Evaluation Report")
        refinements = (tmp_path / "refinements.jsonl").read_text().splitlines()
        assert len(refinements) == 1
        assert json.loads(refinements[0])["op"]["target"] == "ASR-002"

    def test_transcript_files_are_numbered_per_activity(self, tmp_path):
        store = ProjectStore.create(tmp_path, "demo", clock=TickClock())
        store.import_story(STORY)
        store.propose_asrs(
            [asr("ASR-001")],
            [bot_event(ArtifactKind.ASR, "ASR-001")],
            transcript=b"one\n",
        )
        store.propose_asrs(
            [asr("ASR-002")],
            [bot_event(ArtifactKind.ASR, "ASR-002")],
            transcript=b"two\n",
        )
        assert store.transcript_names == ("analysis-1", "analysis-2")
        assert store.transcript("analysis-2") == b"two\n"
        with pytest.raises(UnknownArtifact):
            store.transcript("analysis-3")

    def test_model_revision_ids_count_per_kind(self, tmp_path):
        store = ProjectStore.create(tmp_path, "demo", clock=TickClock())
        store.import_story(STORY)
        store.propose_asrs([asr("ASR-001")], [bot_event(ArtifactKind.ASR, "ASR-001")])
        store.accept_asrs(["ASR-001"])
        first, _ = store.add_model_revision(DiagramKind.CLASS, SCRIPT)
        second, _ = store.add_model_revision(DiagramKind.CLASS, SCRIPT)
        third, _ = store.add_model_revision(DiagramKind.COMPONENT, "@startuml\n@enduml\n")
        assert (first, second, third) == (
            "class_diagram-1",
            "class_diagram-2",
            "component_diagram-1",
        )
        assert store.model_revision(second).script == SCRIPT
        with pytest.raises(UnknownArtifact):
            store.model_revision("class_diagram-9")

    def test_invalid_script_is_rejected_before_any_write(self, tmp_path):
        store = ProjectStore.create(tmp_path, "demo", clock=TickClock())
        store.import_story(STORY)
        store.propose_asrs([asr("ASR-001")], [bot_event(ArtifactKind.ASR, "ASR-001")])
        store.accept_asrs(["ASR-001"])
        before = len(store.entries)
        with pytest.raises(Exception):
            store.add_model_revision(DiagramKind.CLASS, "@startuml\nclass A junk\n@enduml\n")
        assert len(store.entries) == before
        assert list((tmp_path / "models").iterdir()) == []


class TestGates:
    def test_story_import_twice(self, tmp_path):
        store = ProjectStore.create(tmp_path, "demo", clock=TickClock())
        store.import_story(STORY)
        with pytest.raises(PreconditionFailed):
            store.import_story(STORY)

    def test_defective_story_is_rejected(self, tmp_path):
        store = ProjectStore.create(tmp_path, "demo", clock=TickClock())
        with pytest.raises(PreconditionFailed) as exc_info:
            store.import_story(ArchitectureStory(id="s", narrative="   "))
        assert exc_info.value.detail["defects"]

    def test_analysis_requires_a_story(self, tmp_path):
        store = ProjectStore.create(tmp_path, "demo", clock=TickClock())
        with pytest.raises(GateUnsatisfied):
            store.propose_asrs([asr("ASR-001")], [bot_event(ArtifactKind.ASR, "ASR-001")])

    def test_synthesis_in_story_capture_reports_the_gate(self, tmp_path):
        store = ProjectStore.create(tmp_path, "demo", clock=TickClock())
        with pytest.raises(GateUnsatisfied):
            store.add_model_revision(DiagramKind.CLASS, SCRIPT)

    def test_scenarios_require_a_model(self, tmp_path):
        store = ProjectStore.create(tmp_path, "demo", clock=TickClock())
        store.import_story(STORY)
        store.propose_asrs([asr("ASR-001")], [bot_event(ArtifactKind.ASR, "ASR-001")])
        store.accept_asrs(["ASR-001"])
        with pytest.raises(GateUnsatisfied):
            store.add_scenarios([scenario("SCN-001")], [bot_event(ArtifactKind.SCENARIO, "SCN-001")])

    def test_reported_phase_blocks_new_models(self, tmp_path):
        store = drive_full_session(tmp_path)
        with pytest.raises(IllegalTransition):
            store.add_model_revision(DiagramKind.CLASS, SCRIPT)

    def test_refinement_after_report_returns_to_analysis(self, tmp_path):
        store = drive_full_session(tmp_path)
        store.apply_refinement(
            RefinementOp(op=RefinementKind.UPDATE, target="ASR-001", payload={"statement": "better"})
        )
        assert store.state.phase is Phase.ANALYSIS
        assert store.state.revision == 5


class TestLocking:
    def test_existing_lock_blocks_writers(self, tmp_path):
        store = ProjectStore.create(tmp_path, "demo", clock=TickClock())
        (tmp_path / ".lock").write_text("1234\n")
        with pytest.raises(ProjectLocked):
            store.import_story(STORY)

    def test_lock_is_released_after_mutation(self, tmp_path):
        store = ProjectStore.create(tmp_path, "demo", clock=TickClock())
        store.import_story(STORY)
        assert not (tmp_path / ".lock").exists()

    def test_lock_is_released_after_failure(self, tmp_path):
        store = ProjectStore.create(tmp_path, "demo", clock=TickClock())
        store.import_story(STORY)
        with pytest.raises(PreconditionFailed):
            store.import_story(STORY)
        assert not (tmp_path / ".lock").exists()


class TestRebuild:
    def test_event_log_rebuilds_the_persisted_state(self, tmp_path):
        store = drive_full_session(tmp_path)
        assert rebuild(tmp_path) == store.state
        assert rebuild(tmp_path) == ProjectStore.open(tmp_path).state

    def test_rebuild_at_each_intermediate_step(self, tmp_path):
        store = ProjectStore.create(tmp_path, "demo", clock=TickClock())
        assert rebuild(tmp_path) == store.state
        store.import_story(STORY)
        assert rebuild(tmp_path) == store.state
        store.propose_asrs([asr("ASR-001")], [bot_event(ArtifactKind.ASR, "ASR-001")])
        assert rebuild(tmp_path) == store.state
        store.accept_asrs(["ASR-001"])
        assert rebuild(tmp_path) == store.state

    def test_replay_requires_the_creation_event(self):
        with pytest.raises(SchemaViolation):
            replay_events([{"event": "transition", "from": "analysis", "to": "synthesis"}])
        with pytest.raises(SchemaViolation):
            replay_events([])

    def test_replay_rejects_unknown_events(self):
        with pytest.raises(SchemaViolation):
            replay_events(
                [{"event": "project_created", "id": "p"}, {"event": "mystery"}]
            )


class TestProvenanceSummary:
    def test_empty_project_is_all_zero(self, tmp_path):
        store = ProjectStore.create(tmp_path, "demo")
        summary = store.provenance_summary()
        assert summary.total == 0
        assert all(n == 0 for origins in summary.by_kind.values() for n in origins.values())
        assert summary.human_reviewed is True

    def test_counts_group_by_kind_and_origin(self, tmp_path):
        store = drive_full_session(tmp_path)
        summary = store.provenance_summary()
        assert summary.by_kind["asr"] == {"architect": 1, "bot": 2, "merged": 0}
        assert summary.by_kind["scenario"] == {"architect": 0, "bot": 2, "merged": 0}
        assert summary.by_kind["transcript"] == {"architect": 0, "bot": 0, "merged": 3}
        assert summary.total == len(store.entries)

    def test_totals_sum_to_ledger_length(self, tmp_path):
        store = drive_full_session(tmp_path)
        summary = store.provenance_summary()
        assert sum(n for origins in summary.by_kind.values() for n in origins.values()) == summary.total

    def test_bot_only_artifact_clears_the_reviewed_flag(self, tmp_path):
        store = drive_full_session(tmp_path)
        assert store.provenance_summary().human_reviewed is False

    def test_all_architect_records_set_the_reviewed_flag(self):
        from coarch.ledger import append_provenance

        entries = ()
        for seq, artifact_id in enumerate(["ASR-001", "ASR-002"], start=1):
            event = ProvenanceEvent(
                artifact_ref=ArtifactRef(kind=ArtifactKind.ASR, id=artifact_id),
                origin=Origin.ARCHITECT,
            )
            entries = append_provenance(entries, event.sequenced(seq, "t"))
        assert provenance_summary(entries).human_reviewed is True

    def test_merged_record_counts_as_review(self):
        from coarch.ledger import append_provenance

        bot = ProvenanceEvent(
            artifact_ref=ArtifactRef(kind=ArtifactKind.ASR, id="ASR-001"),
            origin=Origin.BOT,
        )
        merged = ProvenanceEvent(
            artifact_ref=ArtifactRef(kind=ArtifactKind.ASR, id="ASR-001"),
            origin=Origin.MERGED,
        )
        entries = append_provenance((), bot.sequenced(1, "t"))
        assert provenance_summary(entries).human_reviewed is False
        entries = append_provenance(entries, merged.sequenced(2, "t"))
        assert provenance_summary(entries).human_reviewed is True
