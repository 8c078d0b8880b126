"""Shared test utilities."""

import importlib.util
import json
from pathlib import Path

REPO_ROOT = Path(__file__).resolve().parents[1]

# Ledger records carry wall-clock timestamps, and each entry digest seals
# the timestamp, so the digest and chain-link fields vary with it.
LEDGER_VOLATILE_KEYS = ("timestamp", "digest", "prev_digest")


def project_snapshot(root: Path) -> dict[str, object]:
    """Directory contents keyed by relative path, bytes except for the
    ledger, whose entries are parsed with the volatile fields removed."""
    snapshot: dict[str, object] = {}
    for path in sorted(Path(root).rglob("*")):
        if path.is_dir() or path.name == ".lock":
            continue
        rel = path.relative_to(root).as_posix()
        data = path.read_bytes()
        if rel == "ledger.jsonl":
            entries = []
            for line in data.decode("utf-8").splitlines():
                payload = json.loads(line)
                for key in LEDGER_VOLATILE_KEYS:
                    payload.pop(key, None)
                entries.append(payload)
            snapshot[rel] = entries
        else:
            snapshot[rel] = data
    return snapshot


def load_script(name: str):
    """Import a module from scripts/ by file name."""
    path = REPO_ROOT / "scripts" / f"{name}.py"
    spec = importlib.util.spec_from_file_location(name, path)
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return module


def fixture_script():
    """Import scripts/make_fixtures.py, the canonical session definition.

    Tests that replay the packaged fixtures take the architect-side ops
    from the same module that recorded them, so the two cannot drift.
    """
    return load_script("make_fixtures")


def campusbike_commands(story_path: Path, backend: str = "replay:campusbike"):
    """The CampusBike session as CLI argument lists, in order."""
    canon = fixture_script()
    commands = [
        ["init", "--id", "campusbike"],
        ["story", "import", str(story_path)],
        ["analyze", "--backend", backend],
    ]
    commands += [["refine", json.dumps(op)] for op in canon.REFINEMENTS]
    commands += [
        ["accept", *canon.ACCEPT_IDS],
        ["synthesize", "class", "--backend", backend],
        ["check", "singleton", "UserLogin"],
        ["check", "cached", "ViewBikes"],
        ["check", "data_minimized", "UserLocation"],
        ["scenarios", "--focus", canon.SCENARIO_FOCUS, "--backend", backend],
        ["evaluate"],
        ["report"],
    ]
    return commands
