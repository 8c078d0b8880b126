"""Analysis engine: extraction, refinement, lint, acceptance."""

from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

import strategies as strat
from coarch.analysis import (
    DEFAULT_VAGUE_TERMS,
    ExtractionResult,
    LintCode,
    LintFinding,
    RefinementKind,
    RefinementOp,
    accept_asrs,
    apply_refinement,
    extract_asrs,
    lint_asrs,
    parse_asr_block,
)
from coarch.backends import ScriptedBackend
from coarch.errors import (
    InvalidPayload,
    InvariantViolation,
    PreconditionFailed,
    UnknownAsr,
    UnparseableResponse,
)
from coarch.gateway import SessionTranscript, TickClock
from coarch.model import (
    ArchitectureStory,
    Asr,
    AsrKind,
    AsrStatus,
    Comparator,
    Origin,
    QuantifiedCriterion,
)
from coarch.prompts import PromptRegistry

REGISTRY = PromptRegistry.load()

RESERVE_BIKE_TEXT = (
    "system must allow user to view bikes available nearby and enable "
    "reservation of the bike instantly and securely"
)

GOOD_REPLY = (
    "Here are the requirements.\n"
    "```asr\n"
    f"QUALITY | {RESERVE_BIKE_TEXT}\n"
    "FUNCTIONALITY | user registers with the campus bike service\n"
    "CONSTRAINT | comply with campus data policies\n"
    "```\n"
)


def reserve_bike(status=AsrStatus.REFINED, criterion=None, asr_id="ASR-001") -> Asr:
    return Asr(
        id=asr_id,
        kind=AsrKind.QUALITY,
        statement=RESERVE_BIKE_TEXT,
        criterion=criterion,
        status=status,
    )


def story() -> ArchitectureStory:
    return ArchitectureStory(
        id="campusbike",
        narrative="Students rent bikes across campus using a mobile app.",
    )


def run_extract(backend, existing=()):
    return extract_asrs(
        story(),
        SessionTranscript(session_id="s1", backend_descriptor=backend.descriptor),
        backend,
        TickClock(),
        REGISTRY,
        existing=existing,
    )


class TestParseAsrBlock:
    def test_parses_records_with_and_without_criterion(self):
        asrs = parse_asr_block(
            "```asr\n"
            "QUALITY | respond quickly | response_time_seconds LE 90\n"
            "FUNCTIONALITY | reserve a bike\n"
            "```"
        )
        assert [a.id for a in asrs] == ["ASR-001", "ASR-002"]
        assert asrs[0].criterion == QuantifiedCriterion(
            metric="response_time_seconds", comparator=Comparator.LE, value=90.0
        )
        assert asrs[1].criterion is None
        assert all(a.status is AsrStatus.PROPOSED for a in asrs)

    def test_ids_continue_past_existing(self):
        existing = [reserve_bike(asr_id="ASR-001"), reserve_bike(asr_id="ASR-002")]
        asrs = parse_asr_block("```asr\nFUNCTIONALITY | park the bike\n```", existing)
        assert asrs[0].id == "ASR-003"

    @pytest.mark.parametrize(
        "text",
        [
            "no block at all",
            "```asr\nFUNCTIONALITY | a\n```\n```asr\nFUNCTIONALITY | b\n```",
            "```asr\nWISH | grant wishes\n```",
            "```asr\nQUALITY |  \n```",
            "```asr\nQUALITY | fast | response_time_seconds LE\n```",
            "```asr\nQUALITY | fast | response_time_seconds ABOUT 90\n```",
            "```asr\nQUALITY | fast | Response_Time LE 90\n```",
            "```asr\nQUALITY | fast | response_time_seconds LE soon\n```",
            "```asr\nQUALITY | fast | response_time_seconds LE -1\n```",
            "```asr\nQUALITY | fast | response_time_seconds LE 90 | extra\n```",
        ],
    )
    def test_contract_violations(self, text):
        with pytest.raises(UnparseableResponse):
            parse_asr_block(text)

    def test_kind_matching_ignores_case(self):
        asrs = parse_asr_block("```asr\nquality | quick | count GE 1\n```")
        assert asrs[0].kind is AsrKind.QUALITY


class TestExtractAsrs:
    def test_campusbike_statement_comes_through(self):
        result = run_extract(ScriptedBackend([GOOD_REPLY]))
        statements = [a.statement for a in result.asrs]
        assert any(
            "view bikes available nearby and enable reservation of the bike "
            "instantly and securely" in s
            for s in statements
        )

    def test_every_proposal_gets_a_bot_event(self):
        result = run_extract(ScriptedBackend([GOOD_REPLY]))
        assert len(result.events) == len(result.asrs) == 3
        assert all(e.origin is Origin.BOT for e in result.events)
        assert all(e.turn_ref == "s1#2" for e in result.events)
        assert [e.artifact_ref.id for e in result.events] == ["ASR-001", "ASR-002", "ASR-003"]

    def test_invalid_story_is_a_precondition_error(self):
        bad = ArchitectureStory(id="x", narrative="   ")
        with pytest.raises(PreconditionFailed):
            extract_asrs(
                bad,
                SessionTranscript(session_id="s1"),
                ScriptedBackend([GOOD_REPLY]),
                TickClock(),
                REGISTRY,
            )

    def test_single_repair_round_recovers(self):
        backend = ScriptedBackend(["sorry, no block here", GOOD_REPLY])
        result = run_extract(backend)
        assert len(result.asrs) == 3
        # Both exchanges stay on the transcript: ask, bad reply, repair, good reply.
        assert len(result.transcript.turns) == 4
        assert "asr" in backend.calls[1][-1].content

    def test_two_bad_replies_fail(self):
        backend = ScriptedBackend(["nope", "still nope"])
        with pytest.raises(UnparseableResponse):
            run_extract(backend)


class TestApplyRefinement:
    def test_update_quantifies_instantly_to_ninety_seconds(self):
        asrs = (reserve_bike(),)
        op = RefinementOp(
            op=RefinementKind.UPDATE,
            target="ASR-001",
            payload={
                "criterion": {
                    "metric": "response_time_seconds",
                    "comparator": "le",
                    "value": 90,
                }
            },
        )
        updated, event = apply_refinement(asrs, op, Origin.ARCHITECT)
        assert updated[0].criterion == QuantifiedCriterion(
            "response_time_seconds", Comparator.LE, 90
        )
        assert updated[0].status is AsrStatus.REFINED
        assert event.artifact_ref.id == "ASR-001"
        assert event.origin is Origin.ARCHITECT

    def test_add_gdpr_constraint(self):
        asrs = (reserve_bike(),)
        op = RefinementOp(
            op=RefinementKind.ADD,
            payload={
                "kind": "constraint",
                "statement": "apply data minimization on registration data",
                "tags": ["GDPR"],
            },
        )
        updated, event = apply_refinement(asrs, op, Origin.ARCHITECT)
        added = updated[-1]
        assert added.id == "ASR-002"
        assert added.kind is AsrKind.CONSTRAINT
        assert added.tags == ("GDPR",)
        assert added.status is AsrStatus.REFINED
        assert event.artifact_ref.id == "ASR-002"

    def test_remove_unknown_id(self):
        asrs = tuple(reserve_bike(asr_id=f"ASR-00{i}") for i in (1, 2, 3))
        op = RefinementOp(op=RefinementKind.REMOVE, target="ASR-999")
        with pytest.raises(UnknownAsr):
            apply_refinement(asrs, op, Origin.ARCHITECT)

    def test_remove_is_a_tombstone_not_a_deletion(self):
        asrs = (reserve_bike(),)
        updated, _ = apply_refinement(
            asrs, RefinementOp(op=RefinementKind.REMOVE, target="ASR-001"), Origin.ARCHITECT
        )
        assert len(updated) == 1
        assert updated[0].status is AsrStatus.REJECTED

    def test_tombstones_never_change_again(self):
        asrs = (reserve_bike(status=AsrStatus.REJECTED),)
        for op in (
            RefinementOp(op=RefinementKind.REMOVE, target="ASR-001"),
            RefinementOp(
                op=RefinementKind.UPDATE, target="ASR-001", payload={"statement": "x"}
            ),
        ):
            with pytest.raises(InvalidPayload):
                apply_refinement(asrs, op, Origin.ARCHITECT)

    def test_add_reuses_tombstone_free_id_gap(self):
        asrs = (
            reserve_bike(asr_id="ASR-001"),
            reserve_bike(asr_id="ASR-003"),
        )
        updated, _ = apply_refinement(
            asrs,
            RefinementOp(op=RefinementKind.ADD, payload={"kind": "functionality", "statement": "x"}),
            Origin.ARCHITECT,
        )
        assert updated[-1].id == "ASR-002"

    @pytest.mark.parametrize(
        "op_kwargs",
        [
            {"op": RefinementKind.ADD, "target": "ASR-001"},
            {"op": RefinementKind.UPDATE},
            {"op": RefinementKind.REMOVE},
        ],
    )
    def test_target_shape_invariants(self, op_kwargs):
        with pytest.raises(InvalidPayload):
            RefinementOp(**op_kwargs)

    @pytest.mark.parametrize(
        "op",
        [
            RefinementOp(op=RefinementKind.ADD, payload={"statement": "x"}),
            RefinementOp(op=RefinementKind.ADD, payload={"kind": "quality", "statement": "x", "color": "red"}),
            RefinementOp(op=RefinementKind.ADD, payload={"kind": "hope", "statement": "x"}),
            RefinementOp(op=RefinementKind.ADD, payload={"kind": "quality", "statement": ""}),
            RefinementOp(op=RefinementKind.UPDATE, target="ASR-001", payload={}),
            RefinementOp(op=RefinementKind.UPDATE, target="ASR-001", payload={"criterion": 7}),
            RefinementOp(op=RefinementKind.UPDATE, target="ASR-001", payload={"tags": "GDPR"}),
            RefinementOp(op=RefinementKind.REMOVE, target="ASR-001", payload={"statement": "x"}),
        ],
    )
    def test_bad_payloads(self, op):
        with pytest.raises(InvalidPayload):
            apply_refinement((reserve_bike(),), op, Origin.ARCHITECT)

    def test_update_clears_criterion_with_null(self):
        quantified = reserve_bike(
            criterion=QuantifiedCriterion("response_time_seconds", Comparator.LE, 90)
        )
        updated, _ = apply_refinement(
            (quantified,),
            RefinementOp(op=RefinementKind.UPDATE, target="ASR-001", payload={"criterion": None}),
            Origin.ARCHITECT,
        )
        assert updated[0].criterion is None

    def test_replaying_the_op_log_is_deterministic(self):
        ops = [
            RefinementOp(op=RefinementKind.ADD, payload={"kind": "functionality", "statement": "register"}),
            RefinementOp(op=RefinementKind.UPDATE, target="ASR-001", payload={"statement": "updated text"}),
            RefinementOp(op=RefinementKind.REMOVE, target="ASR-002"),
        ]

        def run():
            state = (reserve_bike(),)
            events = []
            for op in ops:
                state, event = apply_refinement(state, op, Origin.ARCHITECT)
                events.append(event)
            return state, events

        first, first_events = run()
        second, second_events = run()
        assert first == second
        assert first_events == second_events
        assert len(first_events) == len(ops)

    def test_round_trips_through_dict(self):
        op = RefinementOp(
            op=RefinementKind.UPDATE, target="ASR-002", payload={"statement": "x"}
        )
        assert RefinementOp.from_dict(op.to_dict()) == op


class TestAcceptAsrs:
    def test_accepts_quantified_quality(self):
        quantified = reserve_bike(
            criterion=QuantifiedCriterion("response_time_seconds", Comparator.LE, 90)
        )
        updated = accept_asrs((quantified,), ["ASR-001"])
        assert updated[0].status is AsrStatus.ACCEPTED

    def test_rejects_unquantified_quality(self):
        with pytest.raises(InvariantViolation) as excinfo:
            accept_asrs((reserve_bike(),), ["ASR-001"])
        assert excinfo.value.asr_id == "ASR-001"

    def test_rejects_tombstones(self):
        with pytest.raises(InvariantViolation):
            accept_asrs((reserve_bike(status=AsrStatus.REJECTED),), ["ASR-001"])

    def test_unknown_id(self):
        with pytest.raises(UnknownAsr):
            accept_asrs((reserve_bike(),), ["ASR-404"])

    def test_batch_failure_is_atomic(self):
        good = Asr(id="ASR-001", kind=AsrKind.FUNCTIONALITY, statement="register")
        bad = reserve_bike(asr_id="ASR-002")  # quality without criterion
        original = (good, bad)
        # Applied singly, the good id would succeed; batched with the bad
        # id nothing may change.
        assert accept_asrs(original, ["ASR-001"])[0].status is AsrStatus.ACCEPTED
        with pytest.raises(InvariantViolation):
            accept_asrs(original, ["ASR-001", "ASR-002"])
        assert original == (good, bad)
        assert original[0].status is AsrStatus.PROPOSED


class TestLintAsrs:
    def test_reserve_bike_findings(self):
        findings = lint_asrs((reserve_bike(),))
        assert [(f.code, f.triggering_term) for f in findings] == [
            (LintCode.UNQUANTIFIED_QUALITY, None),
            (LintCode.VAGUE_TERM, "instantly"),
            (LintCode.VAGUE_TERM, "securely"),
        ]

    def test_quantified_precise_statement_is_clean(self):
        asr = Asr(
            id="ASR-001",
            kind=AsrKind.QUALITY,
            statement="respond within 90 seconds",
            criterion=QuantifiedCriterion("response_time_seconds", Comparator.LE, 90),
            status=AsrStatus.ACCEPTED,
        )
        assert lint_asrs((asr,)) == ()

    def test_empty_list(self):
        assert lint_asrs(()) == ()

    def test_proposed_quality_is_not_flagged_unquantified(self):
        findings = lint_asrs((reserve_bike(status=AsrStatus.PROPOSED),))
        assert LintCode.UNQUANTIFIED_QUALITY not in {f.code for f in findings}

    def test_untagged_constraint_and_empty_statement(self):
        constraint = Asr(id="ASR-001", kind=AsrKind.CONSTRAINT, statement="   ")
        findings = lint_asrs((constraint,))
        assert {f.code for f in findings} == {
            LintCode.EMPTY_STATEMENT,
            LintCode.MISSING_CONSTRAINT_TAG,
        }

    def test_rejected_asrs_are_skipped(self):
        assert lint_asrs((reserve_bike(status=AsrStatus.REJECTED),)) == ()

    def test_whole_word_case_insensitive_matching(self):
        fast = Asr(id="ASR-001", kind=AsrKind.FUNCTIONALITY, statement="Fast checkout")
        breakfast = Asr(
            id="ASR-002", kind=AsrKind.FUNCTIONALITY, statement="breakfast menu"
        )
        findings = lint_asrs((fast, breakfast))
        assert [f.asr_id for f in findings] == ["ASR-001"]
        assert findings[0].triggering_term == "fast"

    def test_default_lexicon(self):
        assert DEFAULT_VAGUE_TERMS == (
            "instantly",
            "securely",
            "fast",
            "scalable",
            "user-friendly",
        )

    def test_vague_term_finding_requires_term(self):
        with pytest.raises(ValueError):
            LintFinding("ASR-001", LintCode.VAGUE_TERM, "detail")

    @given(st.lists(strat.asrs(), max_size=6, unique_by=lambda a: a.id), st.randoms())
    def test_order_independence(self, asr_list, rnd):
        baseline = lint_asrs(tuple(asr_list))
        shuffled = list(asr_list)
        rnd.shuffle(shuffled)
        assert lint_asrs(tuple(shuffled)) == baseline
