"""Author the packaged replay fixtures.

Drives one scripted CampusBike session end to end in a scratch
directory, then re-records its transcripts as a single replayable
fixture. The fixture replays across separate CLI invocations because
the backend resolver resumes the cursor from the project's stored
transcripts.

Regenerate after changing prompt templates or engine behavior:

    python3 scripts/make_fixtures.py

Everything here is deterministic (scripted replies, tick clock), so a
rerun rewrites byte-identical files.
"""

from pathlib import Path
import tempfile

from coarch import workflow
from coarch.backends import ScriptedBackend
from coarch.gateway import (
    Activity,
    Role,
    SessionTranscript,
    TickClock,
    Turn,
    load_fixture,
    merge_sessions,
    record,
)
from coarch.model import ArchitectureStory, DiagramKind, ScenarioSketch
from coarch.project import ProjectStore, serialize_story
from coarch.prompts import PromptRegistry

FIXTURES_DIR = Path(__file__).resolve().parents[1] / "src" / "coarch" / "fixtures"

STORY = ArchitectureStory(
    id="campusbike",
    narrative=(
        "CampusBike is a bike sharing service for a university campus. "
        "Students locate shared bikes parked across campus, reserve one "
        "from their phone, ride, and pay per trip. Demand spikes at "
        "class-change times, so the service must feel immediate, and "
        "rider records fall under campus data policies."
    ),
    scenarios=(
        ScenarioSketch(
            title="Reserve a bike",
            description=(
                "A student finds the nearest available bike and reserves "
                "it before walking over."
            ),
        ),
        ScenarioSketch(
            title="Pay per ride",
            description=(
                "The student ends a ride and the fare settles automatically."
            ),
        ),
    ),
    domain_tags=("mobility", "campus"),
)

ANALYSIS_REPLY = """Reading the story, these are the requirements that will shape the architecture.

```asr
FUNCTIONALITY | system must allow user to view bikes available nearby and enable reservation of the bike instantly and securely
QUALITY | reservation must complete instantly for the rider
CONSTRAINT | comply with relevant campus data security policies
```
"""

SYNTHESIS_REPLY = """Here is a class diagram for the accepted requirements.

```plantuml
@startuml
class UserLogin <<singleton>> {
  -UserLogin()
  {static} +getInstance()
}
class ViewBikes <<cached>> {
  +listNearby()
}
class Reservation {
  +confirm()
}
class UserLocation <<data_minimized>> {
  -coordinates
}
class PaymentGateway {
  +charge()
}
UserLogin --> ViewBikes
ViewBikes --> UserLocation
ViewBikes --> Reservation
@enduml
```
"""

SCENARIO_REPLY = """These scenarios exercise the accepted requirements against the model.

```scenario
INDIVIDUAL | View available bikes (using location proximity) | elements=ViewBikes | asrs=ASR-001
INTERACTING | Reserve a bike right after viewing availability | elements=UserLogin,ViewBikes,Reservation | asrs=ASR-001,ASR-002
INTERACTING | Keep only minimal rider location with each reservation | elements=Reservation,UserLocation | asrs=ASR-003,ASR-004
INTERACTING | Settle payment once the ride ends | elements=Reservation,PaymentGateway | asrs=ASR-002
```
"""

# The architect-side ops mirror the scripted session exactly; replaying
# a different sequence makes the recorded prompts diverge on purpose.
REFINEMENTS = (
    {
        "op": "update",
        "target": "ASR-001",
        "payload": {
            "statement": (
                "system must allow user to view bikes available nearby "
                "via location proximity and enable reservation of the bike"
            ),
        },
    },
    {
        "op": "update",
        "target": "ASR-002",
        "payload": {
            "statement": (
                "reservation must complete within 90 seconds and the "
                "reservation token must be encrypted"
            ),
            "criterion": {
                "metric": "response_time_seconds",
                "comparator": "le",
                "value": 90,
            },
        },
    },
    {
        "op": "add",
        "payload": {
            "kind": "constraint",
            "statement": "apply data minimization on registration data",
            "tags": ["gdpr"],
        },
    },
)

ACCEPT_IDS = ("ASR-001", "ASR-002", "ASR-003", "ASR-004")

FREEFORM_QUESTION = "should the reservation token be encrypted at rest as well"

FREEFORM_REPLY = (
    "Encrypting the token at rest is worthwhile: the reservation record "
    "outlives the ride, and campus data policies treat stored rider "
    "artifacts the same as transmitted ones. Keep the cache on ViewBikes "
    "free of tokens so only Reservation needs the key."
)

SYNTHESIZE_KIND = DiagramKind.CLASS

SCENARIO_FOCUS = "ViewBikes"

PROBE_PROMPT = "what architectural style can be best suited"

STYLE_ANSWERS = (
    "A microservices architecture can be best suited for the system.",
    "A layered architecture can be best suited for the system.",
    "A client-server architecture can be best suited for the system.",
)


def drive_campusbike(root: Path) -> ProjectStore:
    """Run the canonical session against scripted replies."""
    registry = PromptRegistry.load()
    backend = ScriptedBackend(
        [ANALYSIS_REPLY, SYNTHESIS_REPLY, SCENARIO_REPLY, FREEFORM_REPLY]
    )
    store = ProjectStore.create(root, "campusbike")
    workflow.import_story(store, STORY)
    workflow.run_analysis(store, backend, registry)
    for op in REFINEMENTS:
        workflow.apply_refinement(store, op)
    workflow.accept_requirements(store, ACCEPT_IDS)
    workflow.run_synthesis(store, SYNTHESIZE_KIND, backend, registry)
    workflow.run_scenarios(store, backend, registry, focus=SCENARIO_FOCUS)
    workflow.run_evaluation(store)
    workflow.run_freeform(store, FREEFORM_QUESTION, backend, registry)
    return store


def campusbike_fixture() -> bytes:
    with tempfile.TemporaryDirectory() as scratch:
        store = drive_campusbike(Path(scratch) / "campusbike")
        sessions = [
            load_fixture(store.transcript(name)) for name in store.transcript_names
        ]
    merged = merge_sessions("campusbike", sessions)
    return record(merged, PromptRegistry.load().registry_hash())


def probe_fixture(session_id: str, answers) -> bytes:
    clock = TickClock()
    turns = []
    for answer in answers:
        turns.append(
            Turn(
                id=len(turns) + 1,
                role=Role.ARCHITECT,
                content=PROBE_PROMPT,
                activity=Activity.FREEFORM,
                created_at=clock.now(),
            )
        )
        turns.append(
            Turn(
                id=len(turns) + 1,
                role=Role.BOT,
                content=answer,
                activity=Activity.FREEFORM,
                created_at=clock.now(),
            )
        )
    transcript = SessionTranscript(
        session_id=session_id, turns=tuple(turns), backend_descriptor="scripted"
    )
    return record(transcript, PromptRegistry.load().registry_hash())


def main() -> None:
    FIXTURES_DIR.mkdir(parents=True, exist_ok=True)
    outputs = {
        "campusbike-story.md": serialize_story(STORY).encode("utf-8"),
        "campusbike.jsonl": campusbike_fixture(),
        "styles.jsonl": probe_fixture("styles", STYLE_ANSWERS),
        "styles-identical.jsonl": probe_fixture(
            "styles-identical", (STYLE_ANSWERS[0],) * 3
        ),
    }
    for name, data in outputs.items():
        path = FIXTURES_DIR / name
        path.write_bytes(data)
        print(f"wrote {path.relative_to(Path.cwd())} ({len(data)} bytes)")


if __name__ == "__main__":
    main()
