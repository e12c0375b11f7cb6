"""AST for the story DSL, plus the canonical pretty-printer.

Grammar (concrete syntax):

    model      := (eventdef | story)*
    eventdef   := "event" IDENT "(" params? ")" "=" "[" template ("," template)* "]"
    story      := "story" STRING "{" stmt* "}"
    stmt       := "request" eventexpr
                | "waitFor" patternset
                | "block" patternset "until" pattern
                | "repeat" INT "{" stmt* "}"
                | "forever" "{" stmt* "}"
                | "choose" "{" "{" stmt* "}" ("or" "{" stmt* "}")+ "}"
                | "session" IDENT "{" stmt* "}"
    eventexpr  := IDENT ("(" field ("," field)* ")")?
    field      := IDENT ":" (STRING | INT | IDENT)
    pattern    := eventexpr          -- fields act as constraints
    patternset := pattern ("," pattern)*

Comments run from ``//`` to end of line. Spans are carried on every node
but excluded from equality so pretty-print round-trips compare cleanly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from .diagnostics import Span


def quote_string(value: str) -> str:
    """Escape exactly what the lexer understands: \\\\ \\" \\n \\t."""
    out = value.replace("\\", "\\\\").replace('"', '\\"')
    out = out.replace("\n", "\\n").replace("\t", "\\t")
    return f'"{out}"'


@dataclass(frozen=True)
class Ident:
    """A bare identifier used as a field value (param reference or symbol)."""

    name: str

    def __str__(self) -> str:
        return self.name


FieldValue = Union[str, int, Ident]


@dataclass(frozen=True)
class EventExpr:
    """``name(field: value, ...)`` -- an event template or pattern."""

    name: str
    fields: tuple[tuple[str, FieldValue], ...] = ()
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Request:
    event: EventExpr
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class WaitFor:
    patterns: tuple[EventExpr, ...]
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class BlockUntil:
    blocked: tuple[EventExpr, ...]
    release: EventExpr
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Repeat:
    count: int
    body: tuple["Statement", ...]
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Forever:
    body: tuple["Statement", ...]
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Choose:
    branches: tuple[tuple["Statement", ...], ...]
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Session:
    session_id: str
    body: tuple["Statement", ...]
    span: Span | None = field(default=None, compare=False)


Statement = Union[Request, WaitFor, BlockUntil, Repeat, Forever, Choose, Session]


@dataclass(frozen=True)
class EventDef:
    """``event Name(params) = [template, ...]`` -- a refinement macro."""

    name: str
    params: tuple[str, ...]
    body: tuple[EventExpr, ...]
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class StoryDef:
    name: str
    body: tuple[Statement, ...]
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class ModelAst:
    event_defs: tuple[EventDef, ...]
    stories: tuple[StoryDef, ...]


def _format_value(value: FieldValue) -> str:
    if isinstance(value, Ident):
        return value.name
    if isinstance(value, str):
        return quote_string(value)
    return str(value)


def _format_event_expr(expr: EventExpr) -> str:
    if not expr.fields:
        return expr.name
    inner = ", ".join(f"{k}: {_format_value(v)}" for k, v in expr.fields)
    return f"{expr.name}({inner})"


def _format_patternset(patterns: tuple[EventExpr, ...]) -> str:
    return ", ".join(_format_event_expr(p) for p in patterns)


def _format_block(body: tuple[Statement, ...], indent: int, lines: list[str]) -> None:
    for stmt in body:
        _format_statement(stmt, indent, lines)


def _format_statement(stmt: Statement, indent: int, lines: list[str]) -> None:
    pad = "  " * indent
    if isinstance(stmt, Request):
        lines.append(f"{pad}request {_format_event_expr(stmt.event)}")
    elif isinstance(stmt, WaitFor):
        lines.append(f"{pad}waitFor {_format_patternset(stmt.patterns)}")
    elif isinstance(stmt, BlockUntil):
        lines.append(
            f"{pad}block {_format_patternset(stmt.blocked)} until {_format_event_expr(stmt.release)}"
        )
    elif isinstance(stmt, Repeat):
        lines.append(f"{pad}repeat {stmt.count} {{")
        _format_block(stmt.body, indent + 1, lines)
        lines.append(f"{pad}}}")
    elif isinstance(stmt, Forever):
        lines.append(f"{pad}forever {{")
        _format_block(stmt.body, indent + 1, lines)
        lines.append(f"{pad}}}")
    elif isinstance(stmt, Choose):
        lines.append(f"{pad}choose {{")
        for i, branch in enumerate(stmt.branches):
            lines.append(f"{pad}  {{" if i == 0 else f"{pad}  }} or {{")
            _format_block(branch, indent + 2, lines)
        lines.append(f"{pad}  }}")
        lines.append(f"{pad}}}")
    elif isinstance(stmt, Session):
        lines.append(f"{pad}session {stmt.session_id} {{")
        _format_block(stmt.body, indent + 1, lines)
        lines.append(f"{pad}}}")
    else:  # pragma: no cover - exhaustive
        raise TypeError(f"unknown statement {stmt!r}")


def pretty_print(ast: ModelAst) -> str:
    """Canonical concrete syntax; reparsing yields an equal AST."""
    chunks: list[str] = []
    for edef in ast.event_defs:
        params = ", ".join(edef.params)
        body = ", ".join(_format_event_expr(t) for t in edef.body)
        chunks.append(f"event {edef.name}({params}) = [{body}]")
    for story in ast.stories:
        lines = [f"story {quote_string(story.name)} {{"]
        _format_block(story.body, 1, lines)
        lines.append("}")
        chunks.append("\n".join(lines))
    return "\n\n".join(chunks) + ("\n" if chunks else "")
