"""Versioned prompt-template registry.

Templates live as plain-text data files, one per architecting activity
(plus repair and summarize helpers). Placeholders are ``{name}`` markers,
``{{``/``}}`` escape literal braces. A rendered prompt may not contain any
leftover marker. The registry hash is recorded in fixtures and provenance
so artifact diffs can be traced to prompt changes.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterator, Mapping

from coarch.errors import MissingPlaceholder

_MARKER_RE = re.compile(r"[a-z][a-z0-9_]*\}")


def _scan(text: str) -> Iterator[tuple[str, str]]:
    """Yield ("lit", chunk) and ("ph", name) pieces of a template."""
    i = 0
    n = len(text)
    buf: list[str] = []
    while i < n:
        ch = text[i]
        if ch == "{":
            if text.startswith("{{", i):
                buf.append("{")
                i += 2
                continue
            match = _MARKER_RE.match(text, i + 1)
            if match:
                if buf:
                    yield "lit", "".join(buf)
                    buf = []
                yield "ph", match.group(0)[:-1]
                i = match.end()
                continue
            buf.append(ch)
            i += 1
        elif text.startswith("}}", i):
            buf.append("}")
            i += 2
        else:
            buf.append(ch)
            i += 1
    if buf:
        yield "lit", "".join(buf)


@dataclass(frozen=True)
class PromptTemplate:
    activity: str
    template_text: str
    required_placeholders: frozenset[str] = field(default_factory=frozenset)

    @classmethod
    def from_text(cls, activity: str, text: str) -> "PromptTemplate":
        names = frozenset(name for kind, name in _scan(text) if kind == "ph")
        return cls(activity=activity, template_text=text, required_placeholders=names)


def render_prompt(template: PromptTemplate, bindings: Mapping[str, str]) -> str:
    """Substitute every placeholder; any unbound marker is an error."""
    for name in sorted(template.required_placeholders):
        if name not in bindings:
            raise MissingPlaceholder(name)
    parts: list[str] = []
    for kind, piece in _scan(template.template_text):
        if kind == "lit":
            parts.append(piece)
        else:
            if piece not in bindings:
                raise MissingPlaceholder(piece)
            parts.append(str(bindings[piece]))
    return "".join(parts)


class PromptRegistry:
    """All templates of one registry directory, hashed as a unit."""

    def __init__(self, templates: Mapping[str, PromptTemplate]) -> None:
        self._templates = dict(templates)

    @classmethod
    def load(cls, directory: Path | None = None) -> "PromptRegistry":
        if directory is None:
            source = resources.files("coarch").joinpath("prompts")
        else:
            source = Path(directory)
        templates: dict[str, PromptTemplate] = {}
        for entry in sorted(source.iterdir(), key=lambda e: e.name):
            if not entry.name.endswith(".txt"):
                continue
            name = entry.name[: -len(".txt")]
            text = entry.read_text(encoding="utf-8")
            templates[name] = PromptTemplate.from_text(name, text)
        return cls(templates)

    def get(self, name: str) -> PromptTemplate:
        if name not in self._templates:
            raise KeyError(f"no prompt template named {name!r}")
        return self._templates[name]

    def names(self) -> list[str]:
        return sorted(self._templates)

    def registry_hash(self) -> str:
        digest = hashlib.sha256()
        for name in self.names():
            digest.update(name.encode("utf-8"))
            digest.update(b"\x00")
            digest.update(self._templates[name].template_text.encode("utf-8"))
            digest.update(b"\x00")
        return digest.hexdigest()
