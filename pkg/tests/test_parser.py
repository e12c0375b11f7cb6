"""Lexer and parser behavior: tokens, spans, diagnostics, round-trips."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from storyweave.dsl import ParseError, parse_text, pretty_print, syntax
from storyweave.dsl.lexer import KEYWORDS, TokenType, tokenize


class TestLexer:
    def test_basic_tokens(self):
        tokens, diags = tokenize('story "s" { request a(x: 1) }')
        assert not diags
        kinds = [t.type for t in tokens]
        assert kinds[0] is TokenType.IDENT  # 'story' keyword is an IDENT token
        assert TokenType.STRING in kinds
        assert TokenType.INT in kinds
        assert kinds[-1] is TokenType.EOF

    def test_comments_skipped(self):
        tokens, _ = tokenize("// a comment\nrequest // trailing\n")
        assert [t.value for t in tokens if t.type is TokenType.IDENT] == ["request"]

    def test_spans_are_one_based(self):
        tokens, _ = tokenize("ab\n  cd")
        spans = [(t.span.line, t.span.col) for t in tokens if t.type is TokenType.IDENT]
        assert spans == [(1, 1), (2, 3)]

    def test_string_escapes(self):
        tokens, _ = tokenize(r'"a\"b\\c\nd\te"')
        assert tokens[0].value == 'a"b\\c\nd\te'

    def test_unterminated_string(self):
        _, diags = tokenize('"abc')
        assert [d.code for d in diags] == ["unterminated-string"]

    def test_bad_character(self):
        _, diags = tokenize("request @")
        assert [d.code for d in diags] == ["bad-character"]

    def test_negative_int(self):
        tokens, _ = tokenize("a(x: -5)")
        assert any(t.type is TokenType.INT and t.value == -5 for t in tokens)


class TestParser:
    def test_minimal_story(self):
        ast = parse_text('story "s" { request push(color: "green") }')
        assert len(ast.stories) == 1
        (stmt,) = ast.stories[0].body
        assert isinstance(stmt, syntax.Request)
        assert stmt.event == syntax.EventExpr("push", (("color", "green"),))

    def test_unexpected_eof(self):
        with pytest.raises(ParseError) as exc:
            parse_text('story "s" {')
        codes = [d.code for d in exc.value.diagnostics]
        assert codes == ["unexpected-eof"]

    def test_search_pizza_story_shape(self):
        from conftest import SEARCH_SRC

        ast = parse_text(SEARCH_SRC)
        assert [e.name for e in ast.event_defs] == ["ComposeQuery", "StartSearch"]
        (story,) = ast.stories
        (session,) = story.body
        assert isinstance(session, syntax.Session)
        assert session.session_id == "A1"
        assert len(session.body) == 2
        assert all(isinstance(s, syntax.Request) for s in session.body)

    def test_event_def(self):
        ast = parse_text("event E(a, b) = [x(k: a), y(v: b, w: 2)]")
        (edef,) = ast.event_defs
        assert edef.params == ("a", "b")
        assert edef.body[0].fields == (("k", syntax.Ident("a")),)

    def test_block_until(self):
        ast = parse_text('story "s" { block a, b(k: 1) until c }')
        (stmt,) = ast.stories[0].body
        assert isinstance(stmt, syntax.BlockUntil)
        assert len(stmt.blocked) == 2
        assert stmt.release.name == "c"

    def test_wait_for_set(self):
        ast = parse_text('story "s" { waitFor a, b, c }')
        (stmt,) = ast.stories[0].body
        assert [p.name for p in stmt.patterns] == ["a", "b", "c"]

    def test_choose(self):
        ast = parse_text('story "s" { choose { { request a } or { request b } or { request c } } }')
        (stmt,) = ast.stories[0].body
        assert isinstance(stmt, syntax.Choose)
        assert len(stmt.branches) == 3

    def test_choose_needs_two_branches(self):
        with pytest.raises(ParseError) as exc:
            parse_text('story "s" { choose { { request a } } }')
        assert "choose-single-branch" in [d.code for d in exc.value.diagnostics]

    def test_repeat_zero_rejected(self):
        with pytest.raises(ParseError) as exc:
            parse_text('story "s" { repeat 0 { request a } }')
        assert "bad-repeat-count" in [d.code for d in exc.value.diagnostics]

    def test_recovery_finds_multiple_errors(self):
        src = 'story "one" { request } story "two" { waitFor }'
        with pytest.raises(ParseError) as exc:
            parse_text(src)
        assert len(exc.value.diagnostics) >= 2

    def test_error_span_points_into_source(self):
        with pytest.raises(ParseError) as exc:
            parse_text('story "s" {\n  request 5\n}')
        span = exc.value.diagnostics[0].span
        assert (span.line, span.col) == (2, 11)

    def test_keywords_not_event_names(self):
        with pytest.raises(ParseError):
            parse_text('story "s" { request repeat }')

    def test_empty_input_is_empty_model(self):
        ast = parse_text("")
        assert ast == syntax.ModelAst((), ())


_KEYWORD_BLACKLIST = KEYWORDS


def _idents():
    return st.from_regex(r"[a-z][a-z0-9_]{0,5}", fullmatch=True).filter(
        lambda s: s not in _KEYWORD_BLACKLIST
    )


def _values():
    return st.one_of(
        st.integers(min_value=-999, max_value=9999),
        st.text(
            alphabet=st.characters(blacklist_categories=("Cs",)),
            max_size=8,
        ),
        _idents().map(syntax.Ident),
    )


def _fields():
    return st.lists(
        st.tuples(_idents(), _values()), max_size=3, unique_by=lambda kv: kv[0]
    ).map(tuple)


def _event_exprs():
    return st.builds(syntax.EventExpr, _idents(), _fields())


def _patternsets():
    return st.lists(_event_exprs(), min_size=1, max_size=3).map(tuple)


def _statements():
    leaf = st.one_of(
        st.builds(syntax.Request, _event_exprs()),
        st.builds(syntax.WaitFor, _patternsets()),
        st.builds(syntax.BlockUntil, _patternsets(), _event_exprs()),
    )

    def extend(children):
        block = st.lists(children, min_size=0, max_size=3).map(tuple)
        nonempty = st.lists(children, min_size=1, max_size=3).map(tuple)
        return st.one_of(
            st.builds(syntax.Repeat, st.integers(min_value=1, max_value=5), block),
            st.builds(syntax.Forever, nonempty),
            st.builds(syntax.Choose, st.lists(nonempty, min_size=2, max_size=3).map(tuple)),
            st.builds(syntax.Session, _idents(), block),
        )

    return st.recursive(leaf, extend, max_leaves=12)


def _models():
    event_defs = st.lists(
        st.builds(
            syntax.EventDef,
            _idents(),
            st.lists(_idents(), max_size=2, unique=True).map(tuple),
            st.lists(_event_exprs(), min_size=1, max_size=3).map(tuple),
        ),
        max_size=2,
        unique_by=lambda e: e.name,
    ).map(tuple)
    stories = st.lists(
        st.builds(
            syntax.StoryDef,
            st.text(max_size=10),
            st.lists(_statements(), max_size=4).map(tuple),
        ),
        max_size=3,
        unique_by=lambda s: s.name,
    ).map(tuple)
    return st.builds(syntax.ModelAst, event_defs, stories)


class TestRoundTrip:
    @settings(max_examples=150, deadline=None)
    @given(_models())
    def test_pretty_print_reparses_equal(self, ast):
        printed = pretty_print(ast)
        reparsed = parse_text(printed)
        assert reparsed == ast  # spans excluded from equality

    def test_fixture_sources_round_trip(self):
        from conftest import BUTTONS_CONSTRAINED_SRC, SEARCH_SRC, two_session_src

        for src in (BUTTONS_CONSTRAINED_SRC, SEARCH_SRC, two_session_src(4)):
            once = pretty_print(parse_text(src))
            assert pretty_print(parse_text(once)) == once


class TestNoCrash:
    @settings(max_examples=300, deadline=None)
    @given(st.text(max_size=80))
    def test_parse_returns_or_diagnoses(self, text):
        try:
            parse_text(text)
        except ParseError:
            pass  # diagnostics are the contract; anything else is a crash

    @settings(max_examples=200, deadline=None)
    @given(st.binary(max_size=60))
    def test_parse_latin1_bytes(self, raw):
        try:
            parse_text(raw.decode("latin-1"))
        except ParseError:
            pass
