"""Checked, fully expanded story models.

This is the layer the engine executes: every high-level request has been
macro-expanded to its low-level sequence, session tags are already on the
events, and session blocks have been dissolved. Loops stay symbolic with
their counts.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from .events import Event, EventPattern, canonical_json


@dataclass(frozen=True)
class RequestStmt:
    event: Event


@dataclass(frozen=True)
class WaitForStmt:
    patterns: tuple[EventPattern, ...]


@dataclass(frozen=True)
class BlockUntilStmt:
    blocked: tuple[EventPattern, ...]
    release: EventPattern


@dataclass(frozen=True)
class RepeatStmt:
    count: int
    body: tuple["Stmt", ...]


@dataclass(frozen=True)
class ForeverStmt:
    body: tuple["Stmt", ...]


@dataclass(frozen=True)
class ChooseStmt:
    branches: tuple[tuple["Stmt", ...], ...]


Stmt = Union[RequestStmt, WaitForStmt, BlockUntilStmt, RepeatStmt, ForeverStmt, ChooseStmt]

SYNC_STMTS = (RequestStmt, WaitForStmt, BlockUntilStmt, ChooseStmt)


@dataclass(frozen=True)
class CheckedStory:
    name: str
    body: tuple[Stmt, ...]


@dataclass(frozen=True)
class CheckedModel:
    """Expanded stories plus the vocabulary of emittable event names.

    ``event_defs`` keeps the refinement macros around (stories no longer
    reference them) so the expansion pass can be re-applied; on an already
    expanded model it is the identity.
    """

    stories: tuple[CheckedStory, ...]
    vocabulary: frozenset[str] = frozenset()
    event_defs: tuple = ()  # tuple[syntax.EventDef, ...]; kept opaque here
    warnings: tuple = field(default=(), compare=False)

    def story_names(self) -> list[str]:
        return [s.name for s in self.stories]

    def to_obj(self) -> dict:
        return {
            "stories": [
                {"name": s.name, "body": [_stmt_obj(st) for st in s.body]} for s in self.stories
            ],
            "vocabulary": sorted(self.vocabulary),
        }

    def serialize(self) -> str:
        """Canonical bytes; equal models serialize identically."""
        return canonical_json(self.to_obj())


def _pattern_obj(p: EventPattern) -> dict:
    return {"name": p.name, "constraints": dict(p.constraints)}


def _stmt_obj(stmt: Stmt) -> dict:
    if isinstance(stmt, RequestStmt):
        return {"kind": "request", "event": stmt.event.to_obj()}
    if isinstance(stmt, WaitForStmt):
        return {"kind": "waitFor", "patterns": [_pattern_obj(p) for p in stmt.patterns]}
    if isinstance(stmt, BlockUntilStmt):
        return {
            "kind": "block",
            "blocked": [_pattern_obj(p) for p in stmt.blocked],
            "release": _pattern_obj(stmt.release),
        }
    if isinstance(stmt, RepeatStmt):
        return {"kind": "repeat", "count": stmt.count, "body": [_stmt_obj(s) for s in stmt.body]}
    if isinstance(stmt, ForeverStmt):
        return {"kind": "forever", "body": [_stmt_obj(s) for s in stmt.body]}
    if isinstance(stmt, ChooseStmt):
        return {
            "kind": "choose",
            "branches": [[_stmt_obj(s) for s in branch] for branch in stmt.branches],
        }
    raise TypeError(f"unknown statement {stmt!r}")  # pragma: no cover


def contains_sync(body: tuple[Stmt, ...]) -> bool:
    """True if executing the body always reaches a synchronization point."""
    for stmt in body:
        if isinstance(stmt, SYNC_STMTS):
            return True
        if isinstance(stmt, (RepeatStmt, ForeverStmt)) and contains_sync(stmt.body):
            return True
    return False
