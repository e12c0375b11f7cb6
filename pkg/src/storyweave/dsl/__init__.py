"""Story DSL front end: lexer, parser, checker, and project loading."""

from __future__ import annotations

from pathlib import Path

from ..model import CheckedModel
from . import syntax
from .checker import check, expand_refinements
from .diagnostics import (
    CheckError,
    Diagnostic,
    DiagnosticsError,
    ParseError,
    Severity,
    Span,
)
from .lexer import Token, TokenType, tokenize
from .parser import Parser, SourceFile, parse, parse_text
from .syntax import ModelAst, pretty_print

STORY_SUFFIX = ".story"


def merge_asts(asts: list[ModelAst]) -> ModelAst:
    event_defs: list = []
    stories: list = []
    for ast in asts:
        event_defs.extend(ast.event_defs)
        stories.extend(ast.stories)
    return ModelAst(tuple(event_defs), tuple(stories))


def load_project(project_dir: str | Path) -> CheckedModel:
    """Parse and check every ``.story`` file in a project directory.

    Files combine in lexicographic filename order into a single model.
    Raises ParseError/CheckError with diagnostics, or FileNotFoundError
    when the directory holds no story files.
    """
    directory = Path(project_dir)
    paths = sorted(directory.glob(f"*{STORY_SUFFIX}"), key=lambda p: p.name)
    if not paths:
        raise FileNotFoundError(f"no {STORY_SUFFIX} files found in {directory}")
    asts = []
    diagnostics: list[Diagnostic] = []
    for path in paths:
        source = SourceFile(str(path), path.read_text(encoding="utf-8"))
        try:
            asts.append(parse(source))
        except ParseError as exc:
            diagnostics.extend(exc.diagnostics)
    if diagnostics:
        raise ParseError(diagnostics)
    return check(merge_asts(asts))


def compile_text(text: str, path: str = "<input>") -> CheckedModel:
    """Parse + check a single source string (the main test entry point)."""
    return check(parse_text(text, path))


__all__ = [
    "CheckError",
    "Diagnostic",
    "DiagnosticsError",
    "ModelAst",
    "ParseError",
    "Parser",
    "Severity",
    "SourceFile",
    "Span",
    "Token",
    "TokenType",
    "check",
    "compile_text",
    "expand_refinements",
    "load_project",
    "merge_asts",
    "parse",
    "parse_text",
    "pretty_print",
    "syntax",
    "tokenize",
]
