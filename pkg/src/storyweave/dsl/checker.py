"""Semantic checks and refinement expansion.

``check`` turns a parsed model into a CheckedModel: it validates names and
arities, attaches session tags to every event emitted inside a ``session``
block, macro-expands high-level requests through their event definitions,
and computes the emittable-event vocabulary. Patterns that can never match
an emittable event get an ``unmatched-pattern`` warning, not an error.
"""

from __future__ import annotations

from ..events import SESSION_FIELD, Event, EventPattern, FieldValue
from ..model import (
    BlockUntilStmt,
    CheckedModel,
    CheckedStory,
    ChooseStmt,
    ForeverStmt,
    RepeatStmt,
    RequestStmt,
    Stmt,
    WaitForStmt,
    contains_sync,
)
from . import syntax
from .diagnostics import CheckError, Diagnostic, Span, error, warning

_FALLBACK_SPAN = Span("<model>", 1, 1, 0)


def _span(node) -> Span:
    return getattr(node, "span", None) or _FALLBACK_SPAN


class _Checker:
    def __init__(self, ast: syntax.ModelAst):
        self.ast = ast
        self.errors: list[Diagnostic] = []
        self.warnings: list[Diagnostic] = []
        self.event_defs: dict[str, syntax.EventDef] = {}

    def run(self) -> CheckedModel:
        self._collect_event_defs()
        stories = self._check_stories()
        if self.errors:
            raise CheckError(self.errors + self.warnings)
        vocabulary = _emittable_names(stories)
        self._warn_unmatched_patterns(stories, vocabulary)
        return CheckedModel(
            stories=tuple(stories),
            vocabulary=vocabulary,
            event_defs=tuple(self.ast.event_defs),
            warnings=tuple(self.warnings),
        )

    # -- event definitions ----------------------------------------------

    def _collect_event_defs(self) -> None:
        for edef in self.ast.event_defs:
            if edef.name in self.event_defs:
                self.errors.append(
                    error("duplicate-name", f"duplicate event definition '{edef.name}'", _span(edef))
                )
                continue
            self.event_defs[edef.name] = edef
        for edef in self.event_defs.values():
            self._check_event_def(edef)

    def _check_event_def(self, edef: syntax.EventDef) -> None:
        seen_params = set()
        for param in edef.params:
            if param in seen_params:
                self.errors.append(
                    error("duplicate-name", f"duplicate parameter '{param}' in event '{edef.name}'", _span(edef))
                )
            seen_params.add(param)
        for template in edef.body:
            if template.name in self.event_defs:
                self.errors.append(
                    error(
                        "recursive-eventdef",
                        f"template '{template.name}' names another event definition; "
                        "refinement bodies must be low-level events",
                        _span(template),
                    )
                )
            self._check_unique_keys(template)
            for key, value in template.fields:
                if key == SESSION_FIELD:
                    self.errors.append(
                        error(
                            "explicit-session-field",
                            "the 'session' field is attached by session blocks and cannot be set explicitly",
                            _span(template),
                        )
                    )
                elif isinstance(value, syntax.Ident) and value.name not in seen_params:
                    self.errors.append(
                        error(
                            "unbound-param",
                            f"'{value.name}' is not a parameter of event '{edef.name}'",
                            _span(template),
                        )
                    )

    def _check_unique_keys(self, expr: syntax.EventExpr) -> None:
        seen = set()
        for key, _ in expr.fields:
            if key in seen:
                self.errors.append(
                    error("duplicate-field", f"duplicate field '{key}' in '{expr.name}'", _span(expr))
                )
            seen.add(key)

    # -- stories ----------------------------------------------------------

    def _check_stories(self) -> list[CheckedStory]:
        stories: list[CheckedStory] = []
        seen_names = set()
        for story in self.ast.stories:
            if story.name in seen_names:
                self.errors.append(
                    error("duplicate-name", f"duplicate story '{story.name}'", _span(story))
                )
                continue
            seen_names.add(story.name)
            body = self._check_block(story.body, session=None)
            stories.append(CheckedStory(story.name, tuple(body)))
        return stories

    def _check_block(self, block: tuple[syntax.Statement, ...], session: str | None) -> list[Stmt]:
        result: list[Stmt] = []
        for stmt in block:
            result.extend(self._check_statement(stmt, session))
        return result

    def _check_statement(self, stmt: syntax.Statement, session: str | None) -> list[Stmt]:
        if isinstance(stmt, syntax.Request):
            return self._check_request(stmt, session)
        if isinstance(stmt, syntax.WaitFor):
            return [WaitForStmt(tuple(self._pattern(p) for p in stmt.patterns))]
        if isinstance(stmt, syntax.BlockUntil):
            blocked = tuple(self._pattern(p) for p in stmt.blocked)
            return [BlockUntilStmt(blocked, self._pattern(stmt.release))]
        if isinstance(stmt, syntax.Repeat):
            return [RepeatStmt(stmt.count, tuple(self._check_block(stmt.body, session)))]
        if isinstance(stmt, syntax.Forever):
            body = tuple(self._check_block(stmt.body, session))
            if not contains_sync(body):
                self.errors.append(
                    error(
                        "forever-no-sync",
                        "forever body never reaches a synchronization point "
                        "(needs a request, waitFor, block, or choose)",
                        _span(stmt),
                    )
                )
            return [ForeverStmt(body)]
        if isinstance(stmt, syntax.Choose):
            branches = []
            for branch in stmt.branches:
                checked = tuple(self._check_block(branch, session))
                if not checked or not isinstance(checked[0], (RequestStmt, WaitForStmt, BlockUntilStmt)):
                    self.errors.append(
                        error(
                            "choose-branch-head",
                            "each choose branch must start with a request, waitFor, or block statement",
                            _span(stmt),
                        )
                    )
                branches.append(checked)
            return [ChooseStmt(tuple(branches))]
        if isinstance(stmt, syntax.Session):
            if session is not None:
                self.errors.append(
                    error("nested-session", f"session '{stmt.session_id}' opened inside session '{session}'", _span(stmt))
                )
                return self._check_block(stmt.body, session)
            # Session blocks dissolve; their tag rides on every emitted event.
            return self._check_block(stmt.body, stmt.session_id)
        raise TypeError(f"unknown statement {stmt!r}")  # pragma: no cover

    def _check_request(self, stmt: syntax.Request, session: str | None) -> list[Stmt]:
        expr = stmt.event
        self._check_unique_keys(expr)
        edef = self.event_defs.get(expr.name)
        if edef is None:
            return [RequestStmt(self._concrete_event(expr, session))]
        return self._expand_high_level(expr, edef, session)

    def _expand_high_level(
        self, expr: syntax.EventExpr, edef: syntax.EventDef, session: str | None
    ) -> list[Stmt]:
        given = [k for k, _ in expr.fields]
        if sorted(given) != sorted(edef.params):
            expected = ", ".join(edef.params) or "none"
            got = ", ".join(given) or "none"
            self.errors.append(
                error(
                    "arity-mismatch",
                    f"'{expr.name}' expects arguments ({expected}), got ({got})",
                    _span(expr),
                )
            )
            return []
        bindings: dict[str, FieldValue] = {}
        for key, value in expr.fields:
            bindings[key] = value.name if isinstance(value, syntax.Ident) else value
        steps: list[Stmt] = []
        for template in edef.body:
            fields: dict[str, FieldValue] = {}
            for key, value in template.fields:
                fields[key] = bindings[value.name] if isinstance(value, syntax.Ident) else value
            event = Event.make(template.name, fields)
            if session is not None:
                event = event.with_session(session)
            steps.append(RequestStmt(event))
        return steps

    def _concrete_event(self, expr: syntax.EventExpr, session: str | None) -> Event:
        fields: dict[str, FieldValue] = {}
        for key, value in expr.fields:
            if key == SESSION_FIELD:
                self.errors.append(
                    error(
                        "explicit-session-field",
                        "requests cannot set the 'session' field; open a session block instead",
                        _span(expr),
                    )
                )
                continue
            fields[key] = value.name if isinstance(value, syntax.Ident) else value
        event = Event.make(expr.name, fields)
        if session is not None:
            event = event.with_session(session)
        return event

    def _pattern(self, expr: syntax.EventExpr) -> EventPattern:
        self._check_unique_keys(expr)
        constraints: dict[str, FieldValue] = {}
        for key, value in expr.fields:
            constraints[key] = value.name if isinstance(value, syntax.Ident) else value
        return EventPattern.make(expr.name, constraints)

    # -- vocabulary -------------------------------------------------------

    def _warn_unmatched_patterns(self, stories: list[CheckedStory], vocabulary: frozenset[str]) -> None:
        def visit(stmt: Stmt) -> None:
            if isinstance(stmt, WaitForStmt):
                patterns = stmt.patterns
            elif isinstance(stmt, BlockUntilStmt):
                patterns = stmt.blocked + (stmt.release,)
            elif isinstance(stmt, (RepeatStmt, ForeverStmt)):
                for child in stmt.body:
                    visit(child)
                return
            elif isinstance(stmt, ChooseStmt):
                for branch in stmt.branches:
                    for child in branch:
                        visit(child)
                return
            else:
                return
            for pattern in patterns:
                if pattern.name not in vocabulary:
                    self.warnings.append(
                        warning(
                            "unmatched-pattern",
                            f"pattern '{pattern.canonical()}' matches no event any story can emit",
                            _FALLBACK_SPAN,
                        )
                    )

        for story in stories:
            for stmt in story.body:
                visit(stmt)


def _emittable_names(stories: list[CheckedStory]) -> frozenset[str]:
    names: set[str] = set()

    def visit(stmt: Stmt) -> None:
        if isinstance(stmt, RequestStmt):
            names.add(stmt.event.name)
        elif isinstance(stmt, (RepeatStmt, ForeverStmt)):
            for child in stmt.body:
                visit(child)
        elif isinstance(stmt, ChooseStmt):
            for branch in stmt.branches:
                for child in branch:
                    visit(child)

    for story in stories:
        for stmt in story.body:
            visit(stmt)
    return frozenset(names)


def check(ast: syntax.ModelAst) -> CheckedModel:
    """Validate and fully expand a parsed model.

    Raises CheckError with all error diagnostics when the model is invalid;
    warnings ride on the returned model.
    """
    return _Checker(ast).run()


def expand_refinements(checked: CheckedModel) -> CheckedModel:
    """Re-apply refinement expansion; identity on already-expanded models.

    check() output is always fully expanded, so this is idempotent:
    expand(expand(m)) == expand(m).
    """
    defs = {d.name: d for d in checked.event_defs}
    if not defs:
        return checked

    helper = _Checker(syntax.ModelAst(tuple(checked.event_defs), ()))
    helper.event_defs = defs

    def expand_stmt(stmt: Stmt) -> list[Stmt]:
        if isinstance(stmt, RequestStmt):
            edef = defs.get(stmt.event.name)
            if edef is None:
                return [stmt]
            fields = stmt.event.field_map
            session = fields.pop(SESSION_FIELD, None)
            expr = syntax.EventExpr(stmt.event.name, tuple(fields.items()))
            session_id = session if isinstance(session, str) else None
            return helper._expand_high_level(expr, edef, session_id)
        if isinstance(stmt, RepeatStmt):
            return [RepeatStmt(stmt.count, tuple(expand_body(stmt.body)))]
        if isinstance(stmt, ForeverStmt):
            return [ForeverStmt(tuple(expand_body(stmt.body)))]
        if isinstance(stmt, ChooseStmt):
            return [ChooseStmt(tuple(tuple(expand_body(b)) for b in stmt.branches))]
        return [stmt]

    def expand_body(body: tuple[Stmt, ...]) -> list[Stmt]:
        result: list[Stmt] = []
        for stmt in body:
            result.extend(expand_stmt(stmt))
        return result

    stories = tuple(CheckedStory(s.name, tuple(expand_body(s.body))) for s in checked.stories)
    if helper.errors:
        raise CheckError(helper.errors)
    vocabulary = _emittable_names(list(stories))
    return CheckedModel(
        stories=stories,
        vocabulary=vocabulary,
        event_defs=checked.event_defs,
        warnings=checked.warnings,
    )
