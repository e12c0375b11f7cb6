"""Execution engine: the synchronization run cycle.

Each story runs as an independent thread of statements. At a sync point
every thread declares the events it requests, waits for, and blocks; the
engine selects one requested-and-unblocked event, then resumes the threads
that requested or waited for it. A run ends when nothing is selectable.

Thread state is an immutable stack of frames over the statement tree, so
configurations hash and compare cheaply and the whole state space can be
explored without copying stories.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Literal

from .events import Event, EventPattern, matches_any
from .model import (
    BlockUntilStmt,
    CheckedModel,
    CheckedStory,
    ChooseStmt,
    ForeverStmt,
    RepeatStmt,
    RequestStmt,
    Stmt,
    WaitForStmt,
)
from .rng import Pcg32

# Frame kinds: ("body", idx) | ("repeat", idx, remaining) | ("forever", idx)
#              | ("choose", branch, idx)
Frame = tuple


class NotEnabledError(ValueError):
    """step() was handed an event that is not currently selectable."""


@dataclass(frozen=True)
class SyncStatement:
    """One thread's declaration at a sync point."""

    requested: tuple[Event, ...] = ()
    waited: tuple[EventPattern, ...] = ()
    blocked: tuple[EventPattern, ...] = ()

    def is_empty(self) -> bool:
        return not (self.requested or self.waited or self.blocked)


EMPTY_SYNC = SyncStatement()


@dataclass(frozen=True)
class ThreadState:
    story: str
    frames: tuple[Frame, ...]
    done: bool = False

    def encode(self) -> str:
        return json.dumps([self.story, self.done, [list(f) for f in self.frames]], separators=(",", ":"))


@dataclass(frozen=True)
class Configuration:
    """Complete engine state: one ThreadState per story, in model order."""

    threads: tuple[ThreadState, ...]

    def encode(self) -> str:
        return "[" + ",".join(t.encode() for t in self.threads) + "]"

    def canonical_hash(self) -> str:
        return hashlib.sha256(self.encode().encode("utf-8")).hexdigest()


TerminalFlag = Literal["completed", "depth-capped"]


@dataclass(frozen=True)
class Scenario:
    events: tuple[Event, ...]
    terminal: TerminalFlag = "completed"

    def __len__(self) -> int:
        return len(self.events)

    def labels(self) -> tuple[str, ...]:
        return tuple(e.canonical() for e in self.events)

    def to_obj(self) -> dict:
        return {"events": [e.to_obj() for e in self.events], "terminal": self.terminal}

    @classmethod
    def from_obj(cls, obj: dict) -> "Scenario":
        events = tuple(Event.from_obj(e) for e in obj["events"])
        terminal = obj.get("terminal", "completed")
        if terminal not in ("completed", "depth-capped"):
            raise ValueError(f"bad terminal flag {terminal!r}")
        return cls(events, terminal)


# -- statement navigation ---------------------------------------------------


def _container(story: CheckedStory, frames: tuple[Frame, ...], upto: int) -> tuple[Stmt, ...]:
    """The statement list that frames[upto] indexes into."""
    block: tuple[Stmt, ...] = story.body
    for i in range(upto):
        frame = frames[i]
        stmt = block[frame[1]]
        nxt = frames[i + 1]
        if nxt[0] == "repeat":
            assert isinstance(stmt, RepeatStmt)
            block = stmt.body
        elif nxt[0] == "forever":
            assert isinstance(stmt, ForeverStmt)
            block = stmt.body
        elif nxt[0] == "choose":
            assert isinstance(stmt, ChooseStmt)
            block = stmt.branches[nxt[1]]
        else:  # pragma: no cover - frames are always rooted in a body
            raise AssertionError(f"bad frame {nxt!r}")
    return block


def _current_stmt(story: CheckedStory, frames: tuple[Frame, ...]) -> Stmt:
    block = _container(story, frames, len(frames) - 1)
    frame = frames[-1]
    idx = frame[1] if frame[0] != "choose" else frame[2]
    return block[idx]


def _frame_index(frame: Frame) -> int:
    return frame[1] if frame[0] != "choose" else frame[2]


def _with_index(frame: Frame, idx: int) -> Frame:
    if frame[0] == "choose":
        return (frame[0], frame[1], idx)
    if frame[0] == "repeat":
        return (frame[0], idx, frame[2])
    return (frame[0], idx)


def _settle(story: CheckedStory, frames: tuple[Frame, ...]) -> ThreadState:
    """Descend through control structures until a sync point or story end."""
    while True:
        if not frames:
            return ThreadState(story.name, (), done=True)
        block = _container(story, frames, len(frames) - 1)
        idx = _frame_index(frames[-1])
        if idx >= len(block):
            frames = _advance_out(story, frames)
            continue
        stmt = block[idx]
        if isinstance(stmt, (RequestStmt, WaitForStmt, BlockUntilStmt, ChooseStmt)):
            # Arriving at a block statement installs its register implicitly:
            # the position itself means "blocking until release".
            return ThreadState(story.name, frames)
        if isinstance(stmt, RepeatStmt):
            if not stmt.body:
                frames = frames[:-1] + (_with_index(frames[-1], idx + 1),)
                continue
            frames = frames + (("repeat", 0, stmt.count),)
            continue
        if isinstance(stmt, ForeverStmt):
            if not stmt.body:  # checker forbids this; stay safe anyway
                frames = frames[:-1] + (_with_index(frames[-1], idx + 1),)
                continue
            frames = frames + (("forever", 0),)
            continue
        raise TypeError(f"unknown statement {stmt!r}")  # pragma: no cover


def _advance_out(story: CheckedStory, frames: tuple[Frame, ...]) -> tuple[Frame, ...]:
    """Handle a frame whose index ran past its container."""
    frame = frames[-1]
    if frame[0] == "body":
        return ()
    if frame[0] == "forever":
        return frames[:-1] + (("forever", 0),)
    if frame[0] == "repeat":
        remaining = frame[2] - 1
        if remaining > 0:
            return frames[:-1] + (("repeat", 0, remaining),)
        return _advance_past_current(frames[:-1])
    if frame[0] == "choose":
        return _advance_past_current(frames[:-1])
    raise AssertionError(f"bad frame {frame!r}")  # pragma: no cover


def _advance_past_current(frames: tuple[Frame, ...]) -> tuple[Frame, ...]:
    if not frames:
        return ()
    last = frames[-1]
    return frames[:-1] + (_with_index(last, _frame_index(last) + 1),)


def _initial_thread(story: CheckedStory) -> ThreadState:
    return _settle(story, (("body", 0),))


def _advance_thread(story: CheckedStory, frames: tuple[Frame, ...]) -> ThreadState:
    """Move past the current sync statement and settle at the next one."""
    return _settle(story, _advance_past_current(frames))


def _sync_of(story: CheckedStory, state: ThreadState) -> SyncStatement:
    if state.done:
        return EMPTY_SYNC
    stmt = _current_stmt(story, state.frames)
    if isinstance(stmt, RequestStmt):
        return SyncStatement(requested=(stmt.event,))
    if isinstance(stmt, WaitForStmt):
        return SyncStatement(waited=stmt.patterns)
    if isinstance(stmt, BlockUntilStmt):
        return SyncStatement(waited=(stmt.release,), blocked=stmt.blocked)
    if isinstance(stmt, ChooseStmt):
        requested: list[Event] = []
        waited: list[EventPattern] = []
        blocked: list[EventPattern] = []
        for branch in stmt.branches:
            head = branch[0]
            if isinstance(head, RequestStmt):
                if head.event not in requested:
                    requested.append(head.event)
            elif isinstance(head, WaitForStmt):
                waited.extend(head.patterns)
            elif isinstance(head, BlockUntilStmt):
                waited.append(head.release)
                blocked.extend(head.blocked)
        return SyncStatement(tuple(requested), tuple(waited), tuple(blocked))
    raise AssertionError(f"thread settled on non-sync statement {stmt!r}")  # pragma: no cover


def _step_thread(story: CheckedStory, state: ThreadState, event: Event) -> ThreadState:
    if state.done:
        return state
    stmt = _current_stmt(story, state.frames)
    if isinstance(stmt, RequestStmt):
        if stmt.event == event:
            return _advance_thread(story, state.frames)
        return state
    if isinstance(stmt, WaitForStmt):
        if matches_any(stmt.patterns, event):
            return _advance_thread(story, state.frames)
        return state
    if isinstance(stmt, BlockUntilStmt):
        # Release pattern selected: the register clears and the thread moves on.
        if stmt.release.matches(event):
            return _advance_thread(story, state.frames)
        return state
    if isinstance(stmt, ChooseStmt):
        for b, branch in enumerate(stmt.branches):
            head = branch[0]
            if isinstance(head, RequestStmt):
                hit = head.event == event
            elif isinstance(head, WaitForStmt):
                hit = matches_any(head.patterns, event)
            elif isinstance(head, BlockUntilStmt):
                hit = head.release.matches(event)
            else:  # pragma: no cover - checker enforces branch heads
                hit = False
            if hit:
                committed = state.frames + (("choose", b, 0),)
                return _settle(story, _advance_past_current(committed))
        return state
    raise AssertionError(f"thread settled on non-sync statement {stmt!r}")  # pragma: no cover


# -- engine api ---------------------------------------------------------------


class Engine:
    """Binds a CheckedModel to the pure configuration-transition functions."""

    def __init__(self, model: CheckedModel):
        self.model = model
        self._stories = {s.name: s for s in model.stories}

    def init(self) -> Configuration:
        return Configuration(tuple(_initial_thread(s) for s in self.model.stories))

    def sync_snapshot(self, config: Configuration) -> list[SyncStatement]:
        return [_sync_of(self._stories[t.story], t) for t in config.threads]

    def enabled_events(self, statements: list[SyncStatement]) -> list[Event]:
        blocked: list[EventPattern] = []
        for stmt in statements:
            blocked.extend(stmt.blocked)
        seen: set[Event] = set()
        enabled: list[Event] = []
        for stmt in statements:
            for event in stmt.requested:
                if event in seen:
                    continue
                seen.add(event)
                if not matches_any(tuple(blocked), event):
                    enabled.append(event)
        enabled.sort(key=lambda e: e.canonical())
        return enabled

    def enabled(self, config: Configuration) -> list[Event]:
        return self.enabled_events(self.sync_snapshot(config))

    def step(self, config: Configuration, event: Event) -> Configuration:
        if event not in self.enabled(config):
            raise NotEnabledError(f"event {event.canonical()} is not enabled")
        return self.step_enabled(config, event)

    def step_enabled(self, config: Configuration, event: Event) -> Configuration:
        """step() without the enabledness check; caller guarantees it."""
        return Configuration(
            tuple(_step_thread(self._stories[t.story], t, event) for t in config.threads)
        )

    def run(
        self,
        strategy: str = "first",
        seed: int = 0,
        max_depth: int | None = None,
    ) -> Scenario:
        """Select-and-step until quiescence or the depth cap.

        strategy "first" takes the canonical-order head; "seeded-random"
        draws next_u32 mod len(enabled) from the pinned PCG32 stream.
        """
        if strategy not in ("first", "seeded-random"):
            raise ValueError(f"unknown strategy {strategy!r}")
        rng = Pcg32(seed) if strategy == "seeded-random" else None
        config = self.init()
        events: list[Event] = []
        while True:
            enabled = self.enabled(config)
            if not enabled:
                return Scenario(tuple(events), "completed")
            if max_depth is not None and len(events) >= max_depth:
                return Scenario(tuple(events), "depth-capped")
            if rng is None:
                event = enabled[0]
            else:
                event = enabled[rng.choice_index(len(enabled))]
            events.append(event)
            config = self.step_enabled(config, event)

    def contributing_stories(self, scenario: Scenario) -> set[str]:
        """Names of stories whose requests produced the scenario's events.

        Replays the scenario; raises NotEnabledError if it is not a run of
        this model.
        """
        config = self.init()
        contributors: set[str] = set()
        for event in scenario.events:
            statements = self.sync_snapshot(config)
            if event not in self.enabled_events(statements):
                raise NotEnabledError(f"scenario does not replay: {event.canonical()}")
            for thread, stmt in zip(config.threads, statements):
                if event in stmt.requested:
                    contributors.add(thread.story)
            config = self.step_enabled(config, event)
        return contributors


def init(model: CheckedModel) -> Configuration:
    return Engine(model).init()


def run(
    model: CheckedModel,
    strategy: str = "first",
    seed: int = 0,
    max_depth: int | None = None,
) -> Scenario:
    return Engine(model).run(strategy=strategy, seed=seed, max_depth=max_depth)
