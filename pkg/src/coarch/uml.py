"""Strict parser and canonical printer for the diagram-script dialect.

The dialect is a small PlantUML-like subset: element declarations
(class, component, interface) with optional stereotype annotations and
member blocks, plus four relation arrows. Anything outside the grammar
is a hard error carrying the offending line number, never a best-effort
guess. The full grammar ships as docs/uml-subset.ebnf.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import DuplicateElement, UmlSyntaxError
from .model import (
    Annotation,
    DiagramKind,
    ElementKind,
    Member,
    MemberKind,
    ModelElement,
    ModelGraph,
    Relation,
    RelationKind,
    Visibility,
)

DIALECT = "plantuml-subset-v1"
START_MARKER = "@startuml"
END_MARKER = "@enduml"
COMMENT_PREFIX = "'"

_NAME = r"[A-Za-z_][A-Za-z0-9_]*"
_ELEMENT_KEYWORDS = {
    "class": ElementKind.CLASS,
    "component": ElementKind.COMPONENT,
    "interface": ElementKind.INTERFACE,
}
_HEADER_RE = re.compile(rf"(class|component|interface)\s+({_NAME})")
_ANNOTATION_RE = re.compile(r"\s*<<\s*([a-z][a-z0-9_]*)\s*(?::\s*([^<>]*?)\s*)?>>")
_MEMBER_RE = re.compile(rf"(\{{static\}})?\s*([+-])\s*({_NAME})\s*(\(\s*\))?")
# Realization before dependency: "..|>" contains "..>".
_ARROWS = (
    ("..|>", RelationKind.REALIZATION),
    ("-->", RelationKind.ASSOCIATION),
    ("..>", RelationKind.DEPENDENCY),
    ("*--", RelationKind.COMPOSITION),
)
_ARROW_FOR = {kind: token for token, kind in _ARROWS}
_RELATION_RE = re.compile(
    rf"({_NAME})\s*(\.\.\|>|-->|\.\.>|\*--)\s*({_NAME})\s*(?::\s*(\S.*?))?\s*$"
)
# The only braces legal inside a member block belong to the static marker.
_BRACE_RE = re.compile(r"\{static\}|[{}]")


@dataclass(frozen=True)
class UmlScript:
    """A diagram script plus the dialect and diagram kind it claims."""

    text: str
    diagram_kind: DiagramKind
    dialect: str = DIALECT

    def __post_init__(self) -> None:
        if self.dialect != DIALECT:
            raise ValueError(f"unsupported dialect: {self.dialect}")
        body = self.text.strip()
        if not body.startswith(START_MARKER) or not body.endswith(END_MARKER):
            raise ValueError("script must be wrapped in start and end markers")


def parse_uml_script(script: UmlScript) -> ModelGraph:
    return parse_source(script.text, script.diagram_kind)


def parse_source(text: str, diagram_kind: DiagramKind) -> ModelGraph:
    """Parse raw script text, raising on the first grammar violation."""

    return _Parser(text, diagram_kind).parse()


def pretty_print(graph: ModelGraph) -> str:
    """Render the graph in normal form.

    Normal form: elements in declaration order, then relations in
    declaration order; annotations after the element name; members
    indented two spaces, one per line; no braces on memberless
    elements. parse_source(pretty_print(g)) reproduces g exactly.
    """

    lines = [START_MARKER]
    for element in graph.elements:
        head = f"{element.kind.value} {element.name}"
        for annotation in element.annotations:
            if annotation.note is None:
                head += f" <<{annotation.key}>>"
            else:
                head += f" <<{annotation.key}: {annotation.note}>>"
        if element.members:
            lines.append(head + " {")
            for member in element.members:
                static = "{static} " if member.static else ""
                visibility = "+" if member.visibility is Visibility.PUBLIC else "-"
                parens = "()" if member.kind is MemberKind.OPERATION else ""
                lines.append(f"  {static}{visibility}{member.name}{parens}")
            lines.append("}")
        else:
            lines.append(head)
    for relation in graph.relations:
        line = f"{relation.source} {_ARROW_FOR[relation.kind]} {relation.target}"
        if relation.label is not None:
            line += f" : {relation.label}"
        lines.append(line)
    lines.append(END_MARKER)
    return "\n".join(lines) + "\n"


class _OpenElement:
    """Element header seen, member block not yet closed."""

    def __init__(self, name: str, kind: ElementKind, annotations: tuple[Annotation, ...]):
        self.name = name
        self.kind = kind
        self.annotations = annotations
        self.members: list[Member] = []

    def add_member(self, member: Member, lineno: int) -> None:
        if any(m.name == member.name for m in self.members):
            raise UmlSyntaxError(lineno, "unique member name")
        self.members.append(member)

    def build(self) -> ModelElement:
        return ModelElement(
            name=self.name,
            kind=self.kind,
            members=tuple(self.members),
            annotations=self.annotations,
        )


class _Parser:
    def __init__(self, text: str, diagram_kind: DiagramKind) -> None:
        self.lines = text.splitlines()
        self.diagram_kind = diagram_kind
        self.elements: list[ModelElement] = []
        self.declared: dict[str, int] = {}
        self.relations: list[tuple[Relation, int]] = []
        self.open: _OpenElement | None = None
        self.started = False
        self.ended = False

    def parse(self) -> ModelGraph:
        for lineno, raw in enumerate(self.lines, start=1):
            stripped = raw.strip()
            if not stripped or stripped.startswith(COMMENT_PREFIX):
                continue
            self._statement(stripped, lineno)
        eof = len(self.lines) + 1
        if not self.started:
            raise UmlSyntaxError(eof, f"'{START_MARKER}'")
        if self.open is not None:
            raise UmlSyntaxError(eof, "'}'")
        if not self.ended:
            raise UmlSyntaxError(eof, f"'{END_MARKER}'")
        for relation, lineno in self.relations:
            for endpoint in (relation.source, relation.target):
                if endpoint not in self.declared:
                    raise UmlSyntaxError(
                        lineno, f"declared element (got '{endpoint}')"
                    )
        return ModelGraph(
            diagram_kind=self.diagram_kind,
            elements=tuple(self.elements),
            relations=tuple(relation for relation, _ in self.relations),
        )

    def _statement(self, stripped: str, lineno: int) -> None:
        if not self.started:
            if stripped == START_MARKER:
                self.started = True
                return
            raise UmlSyntaxError(lineno, f"'{START_MARKER}'")
        if self.ended:
            raise UmlSyntaxError(lineno, "end of script")
        if self.open is not None:
            self._body_line(stripped, lineno)
            return
        if stripped == END_MARKER:
            self.ended = True
            return
        keyword = stripped.split(None, 1)[0]
        if keyword in _ELEMENT_KEYWORDS:
            self._element_header(stripped, lineno)
        else:
            self._relation(stripped, lineno)

    def _element_header(self, stripped: str, lineno: int) -> None:
        match = _HEADER_RE.match(stripped)
        if match is None:
            raise UmlSyntaxError(lineno, "element name")
        kind = _ELEMENT_KEYWORDS[match.group(1)]
        name = match.group(2)
        pos = match.end()
        annotations: list[Annotation] = []
        while True:
            annotation = _ANNOTATION_RE.match(stripped, pos)
            if annotation is None:
                break
            key, note = annotation.group(1), annotation.group(2)
            if note is not None and not note:
                raise UmlSyntaxError(lineno, "annotation note")
            if any(a.key == key for a in annotations):
                raise UmlSyntaxError(lineno, "unique annotation key")
            annotations.append(Annotation(key=key, note=note))
            pos = annotation.end()
        rest = stripped[pos:].strip()
        if name in self.declared:
            raise DuplicateElement(name, lineno)
        self.open = _OpenElement(name, kind, tuple(annotations))
        if not rest:
            self._close_element()
        elif rest.startswith("{"):
            closed = self._consume_body(rest[1:], lineno)
            if closed:
                self._close_element()
        else:
            raise UmlSyntaxError(lineno, "'<<annotation>>' or '{'")

    def _body_line(self, stripped: str, lineno: int) -> None:
        if stripped == END_MARKER:
            raise UmlSyntaxError(lineno, "'}'")
        if self._consume_body(stripped, lineno):
            self._close_element()

    def _consume_body(self, text: str, lineno: int) -> bool:
        """Take member text up to a closing brace; True when the block closed."""

        member_text = text
        closed = False
        for match in _BRACE_RE.finditer(text):
            token = match.group()
            if token == "{static}":
                continue
            if token == "{":
                raise UmlSyntaxError(lineno, "member")
            member_text = text[: match.start()]
            if text[match.end() :].strip():
                raise UmlSyntaxError(lineno, "end of member block")
            closed = True
            break
        for piece in member_text.split(";"):
            piece = piece.strip()
            if not piece:
                continue
            assert self.open is not None
            self.open.add_member(self._member(piece, lineno), lineno)
        return closed

    def _member(self, piece: str, lineno: int) -> Member:
        match = _MEMBER_RE.fullmatch(piece)
        if match is None:
            raise UmlSyntaxError(lineno, "member")
        static, visibility, name, parens = match.groups()
        return Member(
            name=name,
            kind=MemberKind.OPERATION if parens else MemberKind.ATTRIBUTE,
            visibility=Visibility.PUBLIC if visibility == "+" else Visibility.PRIVATE,
            static=static is not None,
        )

    def _close_element(self) -> None:
        assert self.open is not None
        self.declared[self.open.name] = len(self.elements)
        self.elements.append(self.open.build())
        self.open = None

    def _relation(self, stripped: str, lineno: int) -> None:
        match = _RELATION_RE.fullmatch(stripped)
        if match is None:
            raise UmlSyntaxError(lineno, "declaration or relation")
        source, arrow, target, label = match.groups()
        kind = dict(_ARROWS)[arrow]
        self.relations.append(
            (Relation(source=source, target=target, kind=kind, label=label), lineno)
        )
