"""Command line for driving one project directory through the process.

Every command maps onto exactly one operation from the workflow layer
and prints that operation's payload as JSON on stdout. Engine errors
are printed as their payload on stderr with the error's exit code, so
scripts can branch on both the code string and the process status.
"""

import json
import sys
from pathlib import Path

import click

from . import workflow
from .analysis import lint_asrs
from .config import Config, load_config
from .errors import CoarchError, UsageError
from .model import DiagramKind
from .project import ProjectStore

_DIAGRAM_KINDS = {
    "class": DiagramKind.CLASS,
    "component": DiagramKind.COMPONENT,
}


def _dumps(payload) -> str:
    return json.dumps(payload, indent=2, ensure_ascii=False)


def _emit(payload) -> None:
    click.echo(_dumps(payload))


class _Session:
    """Lazy handles shared by the subcommands."""

    def __init__(self, project_dir: Path, config_path: Path | None) -> None:
        self.project_dir = project_dir
        self.config_path = config_path
        self._config: Config | None = None

    @property
    def config(self) -> Config:
        if self._config is None:
            self._config = load_config(self.config_path)
        return self._config

    def store(self) -> ProjectStore:
        return ProjectStore.open(self.project_dir)

    def backend(self, descriptor: str | None, store: ProjectStore | None = None):
        chosen = descriptor or self.config.backend
        return workflow.resolve_backend(
            chosen, self.config, search_dir=self.project_dir, store=store
        )

    def registry(self):
        return workflow.registry_for(self.config)


class _Group(click.Group):
    def invoke(self, ctx: click.Context):
        try:
            return super().invoke(ctx)
        except CoarchError as err:
            click.echo(_dumps(err.as_payload()), err=True)
            ctx.exit(err.exit_code)


_backend_option = click.option(
    "--backend",
    "backend",
    default=None,
    metavar="live|replay:<name>",
    help="Chat backend override; defaults to the configured one.",
)


@click.group(cls=_Group)
@click.option(
    "--project-dir",
    type=click.Path(path_type=Path),
    default=Path("."),
    show_default=True,
    help="Project directory to operate on.",
)
@click.option(
    "--config",
    "config_path",
    type=click.Path(path_type=Path),
    default=None,
    help="Config file (otherwise COARCH_CONFIG or built-in defaults).",
)
@click.pass_context
def cli(ctx: click.Context, project_dir: Path, config_path: Path | None) -> None:
    """Collaborative architecting sessions: analyze, synthesize, evaluate."""
    ctx.obj = _Session(project_dir, config_path)


@cli.command()
@click.option("--id", "project_id", default=None, help="Project id (defaults to the directory name).")
@click.pass_obj
def init(session: _Session, project_id: str | None) -> None:
    """Create an empty project in the project directory."""
    name = project_id or session.project_dir.resolve().name
    store = ProjectStore.create(session.project_dir, name)
    _emit(workflow.status_payload(store))


@cli.group()
def story() -> None:
    """Architecture story operations."""


@story.command("import")
@click.argument("file", type=click.Path(path_type=Path))
@click.pass_obj
def story_import(session: _Session, file: Path) -> None:
    """Import the architecture story from a markdown or JSON file."""
    store = session.store()
    _emit(workflow.import_story(store, workflow.load_story_file(file)))


@cli.command()
@_backend_option
@click.pass_obj
def analyze(session: _Session, backend: str | None) -> None:
    """Ask the bot to propose requirements from the story."""
    store = session.store()
    _emit(
        workflow.run_analysis(
            store, session.backend(backend, store), session.registry()
        )
    )


@cli.command()
@click.argument("op_json")
@click.pass_obj
def refine(session: _Session, op_json: str) -> None:
    """Apply one refinement op, given as a JSON object."""
    try:
        op = json.loads(op_json)
    except json.JSONDecodeError as err:
        raise UsageError(f"refinement op is not valid JSON: {err}") from err
    store = session.store()
    _emit(workflow.apply_refinement(store, op))


@cli.command()
@click.argument("ids", nargs=-1, required=True)
@click.pass_obj
def accept(session: _Session, ids: tuple[str, ...]) -> None:
    """Accept the listed requirements (ids, comma or space separated)."""
    flat = [part for chunk in ids for part in chunk.split(",") if part]
    store = session.store()
    _emit(workflow.accept_requirements(store, flat))


@cli.command()
@click.pass_obj
def lint(session: _Session) -> None:
    """Report lint findings for the current requirement list."""
    store = session.store()
    findings = lint_asrs(store.state.asrs)
    _emit({"lint_findings": [f.to_dict() for f in findings]})


@cli.command()
@click.argument("kind", type=click.Choice(sorted(_DIAGRAM_KINDS)))
@_backend_option
@click.pass_obj
def synthesize(session: _Session, kind: str, backend: str | None) -> None:
    """Ask the bot for a model script of the given diagram kind."""
    store = session.store()
    _emit(
        workflow.run_synthesis(
            store,
            _DIAGRAM_KINDS[kind],
            session.backend(backend, store),
            session.registry(),
        )
    )


@cli.command()
@click.argument("pattern")
@click.argument("element")
@click.pass_obj
def check(session: _Session, pattern: str, element: str) -> None:
    """Run a pattern or tactic check against the current model."""
    store = session.store()
    _emit(workflow.run_check(store, pattern, element))


@cli.command()
@click.pass_obj
def trace(session: _Session) -> None:
    """Print the requirement-to-element traceability matrix."""
    store = session.store()
    _emit(workflow.trace_matrix(store))


@cli.command()
@click.option("--focus", default=None, help="Element to focus scenario elicitation on.")
@_backend_option
@click.pass_obj
def scenarios(session: _Session, focus: str | None, backend: str | None) -> None:
    """Elicit and classify evaluation scenarios."""
    store = session.store()
    _emit(
        workflow.run_scenarios(
            store, session.backend(backend, store), session.registry(), focus=focus
        )
    )


@cli.command()
@click.pass_obj
def evaluate(session: _Session) -> None:
    """Evaluate the current scenarios and persist the report."""
    store = session.store()
    _emit(workflow.run_evaluation(store))


@cli.command()
@click.pass_obj
def report(session: _Session) -> None:
    """Print the latest evaluation report."""
    store = session.store()
    _emit(workflow.latest_report(store))


@cli.command()
@click.argument("fixture")
@click.pass_obj
def replay(session: _Session, fixture: str) -> None:
    """Show a recorded fixture: its turns and backend descriptor."""
    data = workflow.fixture_bytes(fixture, search_dir=session.project_dir)
    _emit(workflow.describe_fixture(data, fixture))


@cli.command()
@click.argument("prompt")
@click.option("--n", "n", type=int, required=True, help="How many times to ask.")
@_backend_option
@click.pass_obj
def probe(session: _Session, prompt: str, n: int, backend: str | None) -> None:
    """Ask the same question n times and measure answer divergence."""
    _emit(workflow.run_probe(prompt, n, session.backend(backend)))


@cli.command()
@click.option("--port", type=int, default=None, help="Port override (otherwise from config).")
@click.option(
    "--static",
    "static_dir",
    type=click.Path(path_type=Path),
    default=None,
    help="Directory with a built console to serve at /.",
)
@click.pass_obj
def serve(session: _Session, port: int | None, static_dir: Path | None) -> None:
    """Serve the HTTP API for the architect console.

    The project directory acts as the projects root: every project id
    maps to a subdirectory under it.
    """
    import uvicorn

    from .service import create_app

    app = create_app(session.project_dir, session.config, static_dir=static_dir)
    uvicorn.run(app, host="127.0.0.1", port=port or session.config.port)


def main() -> None:
    cli(prog_name="coarch")


if __name__ == "__main__":
    main()
