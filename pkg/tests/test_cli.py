"""Command-line surface: exit codes, JSON payloads, replay sessions."""

import json
from importlib import resources
from pathlib import Path

import pytest
from click.testing import CliRunner

from helpers import campusbike_commands, project_snapshot
from coarch.cli import cli

STORY_MD = (resources.files("coarch") / "fixtures" / "campusbike-story.md").read_text(
    encoding="utf-8"
)

SIMPLE_STORY = "# lab-booking\n\nResearchers book shared lab equipment by the hour.\n"


@pytest.fixture()
def runner():
    return CliRunner()


def invoke(runner, project_dir, args):
    return runner.invoke(cli, ["--project-dir", str(project_dir), *args])


def invoke_ok(runner, project_dir, args):
    result = invoke(runner, project_dir, args)
    assert result.exit_code == 0, f"{args} failed: {result.stderr or result.output}"
    return json.loads(result.output)


def run_campusbike(runner, project_dir, story_path) -> list[dict]:
    story_path.write_text(STORY_MD, encoding="utf-8")
    return [
        invoke_ok(runner, project_dir, args)
        for args in campusbike_commands(story_path)
    ]


class TestProjectSetup:
    def test_init_reports_fresh_state(self, runner, tmp_path):
        payload = invoke_ok(runner, tmp_path / "p", ["init", "--id", "demo"])
        assert payload["id"] == "demo"
        assert payload["phase"] == "story_capture"
        assert (tmp_path / "p" / "project.json").is_file()
        assert (tmp_path / "p" / "ledger.jsonl").read_bytes() == b""

    def test_init_defaults_id_to_directory_name(self, runner, tmp_path):
        payload = invoke_ok(runner, tmp_path / "rides", ["init"])
        assert payload["id"] == "rides"

    def test_init_twice_fails(self, runner, tmp_path):
        invoke_ok(runner, tmp_path, ["init", "--id", "demo"])
        result = invoke(runner, tmp_path, ["init", "--id", "demo"])
        assert result.exit_code == 2
        assert json.loads(result.stderr)["code"] == "precondition_failed"

    def test_story_import(self, runner, tmp_path):
        story = tmp_path / "story.md"
        story.write_text(SIMPLE_STORY, encoding="utf-8")
        invoke_ok(runner, tmp_path / "p", ["init", "--id", "lab"])
        payload = invoke_ok(runner, tmp_path / "p", ["story", "import", str(story)])
        assert payload["story"]["id"] == "lab-booking"
        assert (tmp_path / "p" / "story.md").is_file()

    def test_commands_without_project_fail(self, runner, tmp_path):
        result = invoke(runner, tmp_path / "absent", ["analyze"])
        assert result.exit_code == 1
        assert json.loads(result.stderr)["code"] == "unknown_project"


class TestCampusbikeReplay:
    def test_full_session_succeeds(self, runner, tmp_path):
        payloads = run_campusbike(runner, tmp_path / "p", tmp_path / "story.md")
        final_asrs = json.loads((tmp_path / "p" / "asrs.json").read_text())["asrs"]
        by_id = {a["id"]: a for a in final_asrs}
        assert by_id["ASR-002"]["criterion"] == {
            "metric": "response_time_seconds",
            "comparator": "le",
            "value": 90,
        }
        gdpr = [a for a in final_asrs if "gdpr" in a["tags"]]
        assert gdpr and "data minimization" in gdpr[0]["statement"]
        report = payloads[-1]
        assert report["report_id"] == "report-1"
        assert report["report"]["per_asr_verdicts"]["ASR-001"] == "satisfied"

    def test_checks_pass_against_replayed_model(self, runner, tmp_path):
        payloads = run_campusbike(runner, tmp_path / "p", tmp_path / "story.md")
        checks = payloads[8:11]
        assert [c["passed"] for c in checks] == [True, True, True]

    def test_two_replays_are_identical_outside_ledger_clock(self, runner, tmp_path):
        run_campusbike(runner, tmp_path / "a", tmp_path / "s1.md")
        run_campusbike(runner, tmp_path / "b", tmp_path / "s2.md")
        assert project_snapshot(tmp_path / "a") == project_snapshot(tmp_path / "b")

    def test_replay_out_of_sequence_reports_mismatch(self, runner, tmp_path):
        story = tmp_path / "story.md"
        story.write_text(STORY_MD, encoding="utf-8")
        project = tmp_path / "p"
        for args in campusbike_commands(story)[:3]:
            invoke_ok(runner, project, args)
        # A second analysis asks a different question than the recorded
        # synthesis exchange the cursor now points at.
        result = invoke(runner, project, ["analyze", "--backend", "replay:campusbike"])
        assert result.exit_code == 3
        assert json.loads(result.stderr)["code"] == "input_mismatch"

    def test_lint_flags_vague_proposals_until_refined(self, runner, tmp_path):
        story = tmp_path / "story.md"
        story.write_text(STORY_MD, encoding="utf-8")
        project = tmp_path / "p"
        commands = campusbike_commands(story)
        for args in commands[:3]:
            invoke_ok(runner, project, args)
        before = invoke_ok(runner, project, ["lint"])["lint_findings"]
        assert {f["code"] for f in before} >= {"vague_term"}
        for args in commands[3:6]:
            invoke_ok(runner, project, args)
        after = invoke_ok(runner, project, ["lint"])["lint_findings"]
        assert all(f["code"] != "vague_term" for f in after)

    def test_trace_links_follow_scenario_citations(self, runner, tmp_path):
        run_campusbike(runner, tmp_path / "p", tmp_path / "story.md")
        matrix = invoke_ok(runner, tmp_path / "p", ["trace"])
        links = {tuple(link) for link in matrix["links"]}
        assert ("ASR-001", "ViewBikes") in links


class TestFailureModes:
    def test_synthesize_before_accept_is_gated(self, runner, tmp_path):
        story = tmp_path / "story.md"
        story.write_text(SIMPLE_STORY, encoding="utf-8")
        invoke_ok(runner, tmp_path / "p", ["init", "--id", "lab"])
        invoke_ok(runner, tmp_path / "p", ["story", "import", str(story)])
        result = invoke(runner, tmp_path / "p", ["synthesize", "class"])
        assert result.exit_code == 2
        assert json.loads(result.stderr)["code"] == "gate_unsatisfied"

    def test_refine_rejects_malformed_json(self, runner, tmp_path):
        invoke_ok(runner, tmp_path, ["init", "--id", "p"])
        result = invoke(runner, tmp_path, ["refine", "{nope"])
        assert result.exit_code == 2
        assert json.loads(result.stderr)["code"] == "usage_error"

    def test_unknown_backend_descriptor(self, runner, tmp_path):
        invoke_ok(runner, tmp_path, ["init", "--id", "p"])
        result = invoke(runner, tmp_path, ["analyze", "--backend", "memory"])
        assert result.exit_code == 2
        assert "backend" in json.loads(result.stderr)["message"]

    def test_missing_replay_fixture(self, runner, tmp_path):
        invoke_ok(runner, tmp_path, ["init", "--id", "p"])
        story = tmp_path / "s.md"
        story.write_text(SIMPLE_STORY, encoding="utf-8")
        invoke_ok(runner, tmp_path, ["story", "import", str(story)])
        result = invoke(runner, tmp_path, ["analyze", "--backend", "replay:nope"])
        assert result.exit_code == 2
        assert "no replay fixture" in json.loads(result.stderr)["message"]

    def test_unknown_check_pattern(self, runner, tmp_path):
        run_campusbike(runner, tmp_path / "p", tmp_path / "story.md")
        result = invoke(runner, tmp_path / "p", ["check", "observer", "ViewBikes"])
        assert result.exit_code == 2

    def test_report_before_any_evaluation(self, runner, tmp_path):
        invoke_ok(runner, tmp_path, ["init", "--id", "p"])
        result = invoke(runner, tmp_path, ["report"])
        assert result.exit_code == 1
        assert json.loads(result.stderr)["code"] == "unknown_artifact"


class TestStandaloneCommands:
    def test_probe_divergence_across_styles(self, runner, tmp_path):
        payload = invoke_ok(
            runner,
            tmp_path,
            [
                "probe",
                "what architectural style can be best suited",
                "--n",
                "3",
                "--backend",
                "replay:styles",
            ],
        )
        assert payload["divergence"] == 1.0
        assert payload["n"] == 3

    def test_probe_divergence_identical_answers(self, runner, tmp_path):
        payload = invoke_ok(
            runner,
            tmp_path,
            [
                "probe",
                "what architectural style can be best suited",
                "--n",
                "3",
                "--backend",
                "replay:styles-identical",
            ],
        )
        assert payload["divergence"] == 0.0

    def test_replay_describes_fixture(self, runner, tmp_path):
        payload = invoke_ok(runner, tmp_path, ["replay", "campusbike"])
        assert payload["session_id"] == "campusbike"
        roles = {turn["role"] for turn in payload["turns"]}
        assert roles == {"architect", "bot"}

    def test_replay_unknown_fixture(self, runner, tmp_path):
        result = invoke(runner, tmp_path, ["replay", "nothere"])
        assert result.exit_code == 2
