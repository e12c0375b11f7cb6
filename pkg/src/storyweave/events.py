"""Event values and patterns.

Events are the atoms of every scenario: a name plus a flat map of
string/int fields. A session tag, when present, is stored as the field
``session``. Equality and ordering are defined over a canonical text
encoding so that every consumer (engine, graph, files) agrees byte-for-byte.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping, Union

FieldValue = Union[str, int]

SESSION_FIELD = "session"


def _encode_value(value: FieldValue) -> str:
    # json gives us "x" vs x and stable int rendering, so "1" != 1.
    return json.dumps(value, ensure_ascii=False)


@dataclass(frozen=True)
class Event:
    """A concrete occurrence: name plus sorted (key, value) fields.

    Ordering helpers sort by :meth:`canonical`, never by raw field values
    (those mix str and int).
    """

    name: str
    fields: tuple[tuple[str, FieldValue], ...] = ()

    def __post_init__(self) -> None:
        ordered = tuple(sorted(self.fields, key=lambda kv: kv[0]))
        object.__setattr__(self, "fields", ordered)

    @classmethod
    def make(cls, name: str, fields: Mapping[str, FieldValue] | None = None) -> "Event":
        return cls(name, tuple((fields or {}).items()))

    @property
    def field_map(self) -> dict[str, FieldValue]:
        return dict(self.fields)

    @property
    def session(self) -> str | None:
        value = self.field_map.get(SESSION_FIELD)
        return value if isinstance(value, str) else None

    def with_session(self, session: str) -> "Event":
        merged = self.field_map
        merged[SESSION_FIELD] = session
        return Event.make(self.name, merged)

    def canonical(self) -> str:
        """Stable text form, e.g. ``push(color="green",session="S1")``."""
        if not self.fields:
            return self.name
        inner = ",".join(f"{k}={_encode_value(v)}" for k, v in self.fields)
        return f"{self.name}({inner})"

    def to_obj(self) -> dict:
        """JSON-ready object: session is lifted out of the field map."""
        fields = self.field_map
        session = fields.pop(SESSION_FIELD, None)
        obj: dict = {"name": self.name, "fields": fields}
        if session is not None:
            obj["session"] = session
        return obj

    @classmethod
    def from_obj(cls, obj: Mapping) -> "Event":
        fields = dict(obj.get("fields", {}))
        if "session" in obj:
            fields[SESSION_FIELD] = obj["session"]
        return cls.make(obj["name"], fields)

    def __str__(self) -> str:
        return self.canonical()


@dataclass(frozen=True)
class EventPattern:
    """Matches events by name plus a partial field constraint map."""

    name: str
    constraints: tuple[tuple[str, FieldValue], ...] = ()

    def __post_init__(self) -> None:
        ordered = tuple(sorted(self.constraints, key=lambda kv: kv[0]))
        object.__setattr__(self, "constraints", ordered)

    @classmethod
    def make(cls, name: str, constraints: Mapping[str, FieldValue] | None = None) -> "EventPattern":
        return cls(name, tuple((constraints or {}).items()))

    def matches(self, event: Event) -> bool:
        if self.name != event.name:
            return False
        fields = event.field_map
        return all(k in fields and fields[k] == v for k, v in self.constraints)

    def canonical(self) -> str:
        if not self.constraints:
            return self.name
        inner = ",".join(f"{k}={_encode_value(v)}" for k, v in self.constraints)
        return f"{self.name}({inner})"

    def __str__(self) -> str:
        return self.canonical()


def matches_any(patterns: tuple[EventPattern, ...], event: Event) -> bool:
    return any(p.matches(event) for p in patterns)


def canonical_json(obj) -> str:
    """The one JSON encoder: sorted keys, no insignificant whitespace."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
