"""Recursive descent parser for the story DSL.

``parse`` returns a ModelAst or raises ParseError carrying diagnostics.
Recovery is panic-mode at the top level: a malformed declaration is
reported, then the parser skips to the next ``event``/``story`` keyword at
brace depth zero so later declarations still get checked.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import syntax
from .diagnostics import Diagnostic, ParseError, error
from .lexer import Token, TokenType, tokenize


@dataclass(frozen=True)
class SourceFile:
    path: str
    content: str


class _Bail(Exception):
    """Internal: abort the current top-level declaration and recover."""


class Parser:
    def __init__(self, tokens: list[Token], file: str):
        self.tokens = tokens
        self.file = file
        self.pos = 0
        self.diagnostics: list[Diagnostic] = []

    # -- token plumbing -------------------------------------------------

    def current(self) -> Token:
        return self.tokens[min(self.pos, len(self.tokens) - 1)]

    def advance(self) -> Token:
        token = self.current()
        if token.type is not TokenType.EOF:
            self.pos += 1
        return token

    def at_keyword(self, word: str) -> bool:
        return self.current().keyword == word

    def eat_keyword(self, word: str) -> Token:
        if not self.at_keyword(word):
            self._unexpected(f"expected '{word}'")
        return self.advance()

    def expect(self, token_type: TokenType, what: str | None = None) -> Token:
        token = self.current()
        if token.type is not token_type:
            self._unexpected(what or f"expected {token_type.value}")
        return self.advance()

    def expect_ident(self, what: str) -> Token:
        token = self.current()
        if token.type is not TokenType.IDENT or token.keyword is not None:
            self._unexpected(f"expected {what}")
        return self.advance()

    def expect_field_name(self) -> Token:
        # Field keys may shadow keywords ('session: S1' in patterns).
        token = self.current()
        if token.type is not TokenType.IDENT:
            self._unexpected("expected field name")
        return self.advance()

    def _unexpected(self, what: str) -> None:
        token = self.current()
        code = "unexpected-eof" if token.type is TokenType.EOF else "unexpected-token"
        self.diagnostics.append(
            error(code, f"{what}, found {token.describe()}", token.span)
        )
        raise _Bail()

    def _recover_to_top_level(self) -> None:
        depth = 0
        while self.current().type is not TokenType.EOF:
            token = self.current()
            if depth <= 0 and token.keyword in ("event", "story"):
                return
            if token.type is TokenType.LBRACE:
                depth += 1
            elif token.type is TokenType.RBRACE:
                depth -= 1
            self.advance()

    # -- grammar --------------------------------------------------------

    def parse_model(self) -> syntax.ModelAst:
        event_defs: list[syntax.EventDef] = []
        stories: list[syntax.StoryDef] = []
        while self.current().type is not TokenType.EOF:
            try:
                if self.at_keyword("event"):
                    event_defs.append(self.parse_event_def())
                elif self.at_keyword("story"):
                    stories.append(self.parse_story())
                else:
                    self._unexpected("expected 'event' or 'story'")
            except _Bail:
                if self.current().type is not TokenType.EOF:
                    self.advance()  # always make progress before recovering
                self._recover_to_top_level()
        return syntax.ModelAst(tuple(event_defs), tuple(stories))

    def parse_event_def(self) -> syntax.EventDef:
        start = self.eat_keyword("event")
        name = self.expect_ident("event name")
        self.expect(TokenType.LPAREN, "expected '('")
        params: list[str] = []
        if self.current().type is not TokenType.RPAREN:
            params.append(str(self.expect_ident("parameter name").value))
            while self.current().type is TokenType.COMMA:
                self.advance()
                params.append(str(self.expect_ident("parameter name").value))
        self.expect(TokenType.RPAREN, "expected ')'")
        self.expect(TokenType.EQUALS, "expected '='")
        self.expect(TokenType.LBRACKET, "expected '['")
        body = [self.parse_event_expr()]
        while self.current().type is TokenType.COMMA:
            self.advance()
            body.append(self.parse_event_expr())
        self.expect(TokenType.RBRACKET, "expected ']'")
        return syntax.EventDef(str(name.value), tuple(params), tuple(body), start.span)

    def parse_story(self) -> syntax.StoryDef:
        start = self.eat_keyword("story")
        name = self.expect(TokenType.STRING, "expected story name string")
        body = self.parse_block()
        return syntax.StoryDef(str(name.value), body, start.span)

    def parse_block(self) -> tuple[syntax.Statement, ...]:
        self.expect(TokenType.LBRACE, "expected '{'")
        statements: list[syntax.Statement] = []
        while self.current().type is not TokenType.RBRACE:
            if self.current().type is TokenType.EOF:
                self._unexpected("expected '}'")
            statements.append(self.parse_statement())
        self.advance()  # '}'
        return tuple(statements)

    def parse_statement(self) -> syntax.Statement:
        token = self.current()
        word = token.keyword
        if word == "request":
            self.advance()
            return syntax.Request(self.parse_event_expr(), token.span)
        if word == "waitFor":
            self.advance()
            return syntax.WaitFor(self.parse_patternset(), token.span)
        if word == "block":
            self.advance()
            blocked = self.parse_patternset()
            self.eat_keyword("until")
            release = self.parse_event_expr()
            return syntax.BlockUntil(blocked, release, token.span)
        if word == "repeat":
            self.advance()
            count_tok = self.expect(TokenType.INT, "expected repeat count")
            count = int(count_tok.value)  # type: ignore[arg-type]
            if count < 1:
                self.diagnostics.append(
                    error("bad-repeat-count", f"repeat count must be >= 1, got {count}", count_tok.span)
                )
                raise _Bail()
            return syntax.Repeat(count, self.parse_block(), token.span)
        if word == "forever":
            self.advance()
            return syntax.Forever(self.parse_block(), token.span)
        if word == "choose":
            self.advance()
            self.expect(TokenType.LBRACE, "expected '{'")
            branches = [self.parse_block()]
            while self.at_keyword("or"):
                self.advance()
                branches.append(self.parse_block())
            if len(branches) < 2:
                self.diagnostics.append(
                    error("choose-single-branch", "choose needs at least two 'or' branches", token.span)
                )
                raise _Bail()
            self.expect(TokenType.RBRACE, "expected '}'")
            return syntax.Choose(tuple(branches), token.span)
        if word == "session":
            self.advance()
            sid = self.expect_ident("session id")
            return syntax.Session(str(sid.value), self.parse_block(), token.span)
        self._unexpected("expected a statement")
        raise AssertionError("unreachable")

    def parse_event_expr(self) -> syntax.EventExpr:
        name = self.expect_ident("event name")
        fields: list[tuple[str, syntax.FieldValue]] = []
        if self.current().type is TokenType.LPAREN:
            self.advance()
            if self.current().type is not TokenType.RPAREN:
                fields.append(self.parse_field())
                while self.current().type is TokenType.COMMA:
                    self.advance()
                    fields.append(self.parse_field())
            self.expect(TokenType.RPAREN, "expected ')'")
        return syntax.EventExpr(str(name.value), tuple(fields), name.span)

    def parse_field(self) -> tuple[str, syntax.FieldValue]:
        key = self.expect_field_name()
        self.expect(TokenType.COLON, "expected ':'")
        token = self.current()
        if token.type is TokenType.STRING:
            self.advance()
            return (str(key.value), str(token.value))
        if token.type is TokenType.INT:
            self.advance()
            return (str(key.value), int(token.value))  # type: ignore[arg-type]
        if token.type is TokenType.IDENT and token.keyword is None:
            self.advance()
            return (str(key.value), syntax.Ident(str(token.value)))
        self._unexpected("expected field value (string, integer, or identifier)")
        raise AssertionError("unreachable")

    def parse_patternset(self) -> tuple[syntax.EventExpr, ...]:
        patterns = [self.parse_event_expr()]
        while self.current().type is TokenType.COMMA:
            self.advance()
            patterns.append(self.parse_event_expr())
        return tuple(patterns)


def parse(source: SourceFile) -> syntax.ModelAst:
    """Parse one source file; raises ParseError with diagnostics on failure."""
    tokens, lex_diags = tokenize(source.content, source.path)
    parser = Parser(tokens, source.path)
    ast = parser.parse_model()
    diagnostics = lex_diags + parser.diagnostics
    if diagnostics:
        raise ParseError(diagnostics)
    return ast


def parse_text(text: str, path: str = "<input>") -> syntax.ModelAst:
    return parse(SourceFile(path, text))
