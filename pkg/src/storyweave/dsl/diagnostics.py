"""Diagnostics for the story DSL front end.

Every parse/check failure is reported as a Diagnostic with a 1-based
source span; errors are carried on exceptions so callers either get a
value or a diagnostic list, never a bare crash.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class Severity(Enum):
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True)
class Span:
    file: str
    line: int
    col: int
    length: int

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.col}"


@dataclass(frozen=True)
class Diagnostic:
    severity: Severity
    code: str
    message: str
    span: Span

    def render(self) -> str:
        return f"{self.span}: {self.severity.value}[{self.code}]: {self.message}"


def error(code: str, message: str, span: Span) -> Diagnostic:
    return Diagnostic(Severity.ERROR, code, message, span)


def warning(code: str, message: str, span: Span) -> Diagnostic:
    return Diagnostic(Severity.WARNING, code, message, span)


class DiagnosticsError(Exception):
    """Raised when a front-end stage produced error diagnostics."""

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = list(diagnostics)
        summary = "; ".join(d.render() for d in self.diagnostics[:3])
        extra = len(self.diagnostics) - 3
        if extra > 0:
            summary += f" (+{extra} more)"
        super().__init__(summary)


class ParseError(DiagnosticsError):
    pass


class CheckError(DiagnosticsError):
    pass
