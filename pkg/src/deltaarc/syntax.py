"""Tokenizer, diagnostics and recursive-descent helpers shared by the three file formats."""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .errors import ParseError

KEYWORDS = frozenset(
    {
        "package", "component", "port", "in", "out", "connect", "autoconnect",
        "delta", "after", "when", "add", "remove", "modify", "replace", "with",
        "expand", "featuremodel", "mandatory", "optional", "constraint",
    }
)


class Severity(Enum):
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True)
class ParseDiagnostic:
    severity: Severity
    line: int
    column: int
    message: str
    code: str
    path: Optional[str] = None

    def format(self) -> str:
        where = self.path or "<input>"
        return f"{where}:{self.line}:{self.column}: {self.severity.value} {self.code}: {self.message}"

    def sort_key(self) -> tuple:
        return (self.path or "", self.line, self.column, self.code)


@dataclass(frozen=True)
class Token:
    kind: str  # "ident", "sym" or "eof"
    text: str
    line: int
    column: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n\f\v]+)
  | (?P<line_comment>//[^\n]*)
  | (?P<block_comment>/\*.*?\*/)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<sym>->|&&|\|\||[{};,.()!])
    """,
    re.VERBOSE | re.DOTALL,
)


class _Abort(Exception):
    pass


def _position(text: str, offset: int) -> tuple[int, int]:
    line = text.count("\n", 0, offset) + 1
    col = offset - (text.rfind("\n", 0, offset) + 1) + 1
    return line, col


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            line, col = _position(text, pos)
            if text.startswith("/*", pos):
                raise ParseError([ParseDiagnostic(Severity.ERROR, line, col, "unterminated block comment", "LEX-ERROR")])
            raise ParseError([ParseDiagnostic(Severity.ERROR, line, col, f"unexpected character {text[pos]!r}", "LEX-ERROR")])
        kind = m.lastgroup
        if kind in ("ident", "sym"):
            line, col = _position(text, pos)
            tokens.append(Token(kind, m.group(), line, col))
        pos = m.end()
    line, col = _position(text, len(text))
    tokens.append(Token("eof", "", line, col))
    return tokens


class Parser:
    """Token cursor with the usual expect/accept helpers.

    Syntax errors abort immediately; semantic problems found while parsing
    (duplicate names and so on) are collected in ``self.diagnostics``.
    """

    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.pos = 0
        self.diagnostics: list[ParseDiagnostic] = []

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, offset: int = 1) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def at(self, text: str) -> bool:
        return self.tok.kind != "eof" and self.tok.text == text

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "eof":
            self.pos += 1
        return t

    def accept(self, text: str) -> Optional[Token]:
        if self.at(text):
            return self.advance()
        return None

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(f"expected {text!r}, found {self.describe(self.tok)}")
        return self.advance()

    def expect_ident(self, what: str = "identifier") -> Token:
        t = self.tok
        if t.kind != "ident" or t.text in KEYWORDS:
            self.fail(f"expected {what}, found {self.describe(t)}")
        return self.advance()

    def at_ident(self) -> bool:
        return self.tok.kind == "ident" and self.tok.text not in KEYWORDS

    def qualified_name(self, what: str = "name") -> tuple[str, Token]:
        first = self.expect_ident(what)
        parts = [first.text]
        while self.at(".") and self.peek().kind == "ident":
            self.advance()
            parts.append(self.expect_ident(what).text)
        return ".".join(parts), first

    @staticmethod
    def describe(t: Token) -> str:
        return "end of input" if t.kind == "eof" else repr(t.text)

    def fail(self, message: str, token: Optional[Token] = None, code: str = "SYNTAX"):
        t = token or self.tok
        self.diagnostics.append(ParseDiagnostic(Severity.ERROR, t.line, t.column, message, code))
        raise _Abort()

    def report(self, token: Token, message: str, code: str, severity: Severity = Severity.ERROR) -> None:
        self.diagnostics.append(ParseDiagnostic(severity, token.line, token.column, message, code))

    def run(self, production):
        """Run ``production``; raise ParseError if any error diagnostic was produced."""
        try:
            result = production()
        except _Abort:
            result = None
        errors = [d for d in self.diagnostics if d.severity is Severity.ERROR]
        if errors:
            raise ParseError(sorted(self.diagnostics, key=ParseDiagnostic.sort_key))
        return result


def with_path(err: ParseError, path: str) -> ParseError:
    from dataclasses import replace

    return ParseError([replace(d, path=path) for d in err.diagnostics])
