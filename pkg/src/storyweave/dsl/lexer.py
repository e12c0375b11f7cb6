"""Tokenizer for the story DSL.

Splits source text into tokens with 1-based line/column spans. Unknown
characters and unterminated strings become error diagnostics rather than
exceptions from deep inside the scanner loop; the parser surfaces them.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .diagnostics import Diagnostic, Span, error


class TokenType(Enum):
    IDENT = "identifier"
    STRING = "string"
    INT = "integer"

    LPAREN = "("
    RPAREN = ")"
    LBRACE = "{"
    RBRACE = "}"
    LBRACKET = "["
    RBRACKET = "]"
    COMMA = ","
    COLON = ":"
    EQUALS = "="

    EOF = "end of file"


KEYWORDS = {
    "event",
    "story",
    "request",
    "waitFor",
    "block",
    "until",
    "repeat",
    "forever",
    "choose",
    "or",
    "session",
}

_PUNCT = {
    "(": TokenType.LPAREN,
    ")": TokenType.RPAREN,
    "{": TokenType.LBRACE,
    "}": TokenType.RBRACE,
    "[": TokenType.LBRACKET,
    "]": TokenType.RBRACKET,
    ",": TokenType.COMMA,
    ":": TokenType.COLON,
    "=": TokenType.EQUALS,
}

_ESCAPES = {'"': '"', "\\": "\\", "n": "\n", "t": "\t"}


def _is_digit(ch: str) -> bool:
    return "0" <= ch <= "9"


def _is_ident_start(ch: str) -> bool:
    return ("a" <= ch <= "z") or ("A" <= ch <= "Z") or ch == "_"


def _is_ident_char(ch: str) -> bool:
    return _is_ident_start(ch) or _is_digit(ch)


@dataclass(frozen=True)
class Token:
    type: TokenType
    value: object  # str for IDENT/STRING, int for INT, None otherwise
    span: Span

    @property
    def keyword(self) -> str | None:
        if self.type is TokenType.IDENT and self.value in KEYWORDS:
            return str(self.value)
        return None

    def describe(self) -> str:
        if self.type is TokenType.IDENT:
            return f"'{self.value}'"
        if self.type is TokenType.STRING:
            return "string"
        if self.type is TokenType.INT:
            return f"'{self.value}'"
        return f"'{self.type.value}'" if self.type is not TokenType.EOF else "end of file"


class Lexer:
    def __init__(self, text: str, file: str):
        self.text = text
        self.file = file
        self.pos = 0
        self.line = 1
        self.col = 1
        self.tokens: list[Token] = []
        self.diagnostics: list[Diagnostic] = []

    def span_here(self, length: int = 1) -> Span:
        return Span(self.file, self.line, self.col, length)

    def _peek(self, offset: int = 0) -> str:
        pos = self.pos + offset
        return self.text[pos] if pos < len(self.text) else ""

    def _advance(self) -> str:
        ch = self.text[self.pos]
        self.pos += 1
        if ch == "\n":
            self.line += 1
            self.col = 1
        else:
            self.col += 1
        return ch

    def tokenize(self) -> tuple[list[Token], list[Diagnostic]]:
        while self.pos < len(self.text):
            ch = self._peek()
            if ch in " \t\r\n":
                self._advance()
            elif ch == "/" and self._peek(1) == "/":
                while self.pos < len(self.text) and self._peek() != "\n":
                    self._advance()
            elif ch == '"':
                self._read_string()
            elif _is_digit(ch) or (ch == "-" and _is_digit(self._peek(1))):
                self._read_int()
            elif _is_ident_start(ch):
                self._read_ident()
            elif ch in _PUNCT:
                span = self.span_here()
                self._advance()
                self.tokens.append(Token(_PUNCT[ch], None, span))
            else:
                self.diagnostics.append(
                    error("bad-character", f"unexpected character {ch!r}", self.span_here())
                )
                self._advance()
        self.tokens.append(Token(TokenType.EOF, None, self.span_here(0)))
        return self.tokens, self.diagnostics

    def _read_string(self) -> None:
        start_line, start_col = self.line, self.col
        self._advance()  # opening quote
        value: list[str] = []
        while True:
            if self.pos >= len(self.text) or self._peek() == "\n":
                span = Span(self.file, start_line, start_col, max(1, self.col - start_col))
                self.diagnostics.append(error("unterminated-string", "unterminated string literal", span))
                break
            ch = self._advance()
            if ch == '"':
                break
            if ch == "\\":
                if self.pos >= len(self.text):
                    continue
                esc = self._advance()
                value.append(_ESCAPES.get(esc, esc))
            else:
                value.append(ch)
        length = self.col - start_col if self.line == start_line else 1
        span = Span(self.file, start_line, start_col, max(1, length))
        self.tokens.append(Token(TokenType.STRING, "".join(value), span))

    def _read_int(self) -> None:
        start_line, start_col = self.line, self.col
        text = []
        if self._peek() == "-":
            text.append(self._advance())
        while self.pos < len(self.text) and _is_digit(self._peek()):
            text.append(self._advance())
        span = Span(self.file, start_line, start_col, self.col - start_col)
        self.tokens.append(Token(TokenType.INT, int("".join(text)), span))

    def _read_ident(self) -> None:
        start_line, start_col = self.line, self.col
        text = []
        while self.pos < len(self.text) and _is_ident_char(self._peek()):
            text.append(self._advance())
        span = Span(self.file, start_line, start_col, self.col - start_col)
        self.tokens.append(Token(TokenType.IDENT, "".join(text), span))


def tokenize(text: str, file: str = "<input>") -> tuple[list[Token], list[Diagnostic]]:
    return Lexer(text, file).tokenize()
