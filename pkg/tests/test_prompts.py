"""Prompt registry: rendering, escaping, and the registry hash."""

from __future__ import annotations

import pytest

from coarch.errors import MissingPlaceholder
from coarch.prompts import PromptRegistry, PromptTemplate, render_prompt

STORY_SNIPPET = "as a step towards maintaining a Green Campus, visitors rent bikes"


@pytest.fixture(scope="module")
def registry() -> PromptRegistry:
    return PromptRegistry.load()


def test_default_registry_has_one_template_per_activity(registry):
    assert set(registry.names()) >= {
        "story_feed",
        "analysis",
        "synthesis",
        "evaluation",
        "freeform",
        "summarize",
    }


def test_analysis_prompt_contains_story_verbatim(registry):
    rendered = render_prompt(registry.get("analysis"), {"story": STORY_SNIPPET})
    assert STORY_SNIPPET in rendered


def test_unbound_required_placeholder_raises(registry):
    with pytest.raises(MissingPlaceholder) as excinfo:
        render_prompt(registry.get("analysis"), {})
    assert excinfo.value.placeholder == "story"


def test_repeated_placeholder_substitutes_both_occurrences():
    template = PromptTemplate.from_text("t", "hello {name}, goodbye {name}.")
    rendered = render_prompt(template, {"name": "Ada"})
    # Oracle: naive string replacement of the marker.
    assert rendered == "hello {name}, goodbye {name}.".replace("{name}", "Ada")


def test_escaped_braces_render_literally():
    template = PromptTemplate.from_text("t", "modifier {{static}} before {vis}")
    assert template.required_placeholders == frozenset({"vis"})
    assert render_prompt(template, {"vis": "+"}) == "modifier {static} before +"


def test_rendered_output_has_no_markers(registry):
    bindings = {
        "story": "s",
        "asrs": "- ASR-001",
        "diagram_kind": "class diagram",
        "elements": "A, B",
        "focus_clause": "",
        "error": "boom",
        "conversation": "architect: hi",
        "content": "hello",
    }
    for name in registry.names():
        rendered = render_prompt(registry.get(name), bindings)
        for required in registry.get(name).required_placeholders:
            assert "{%s}" % required not in rendered


def test_registry_hash_is_stable_and_content_sensitive(registry, tmp_path):
    assert registry.registry_hash() == PromptRegistry.load().registry_hash()
    (tmp_path / "analysis.txt").write_text("changed {story}", encoding="utf-8")
    assert PromptRegistry.load(tmp_path).registry_hash() != registry.registry_hash()
