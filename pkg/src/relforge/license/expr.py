"""SPDX license expressions.

Grammar::

    expr      = and-expr *( "OR" and-expr )
    and-expr  = with-expr *( "AND" with-expr )
    with-expr = primary [ "WITH" exception-id ]
    primary   = id ["+"] | "(" expr ")"
    id        = [A-Za-z0-9.-]+

WITH binds tighter than AND, AND tighter than OR; both binary operators
associate to the left.  Operators are accepted in upper or lower case.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Union

from ..errors import LicenseParseError

_TOKEN = re.compile(r"\s*(?:(?P<id>[A-Za-z0-9.\-]+)|(?P<punct>[()+]))")
_OPERATORS = {"AND", "OR", "WITH"}
ID_PATTERN = re.compile(r"[A-Za-z0-9.\-]+")


@dataclass(frozen=True)
class LicenseId:
    id: str
    or_later: bool = False

    def __str__(self) -> str:
        return self.id + ("+" if self.or_later else "")


@dataclass(frozen=True)
class WithException:
    license: LicenseId
    exception: str

    def __str__(self) -> str:
        return f"{self.license} WITH {self.exception}"


@dataclass(frozen=True)
class And:
    left: "LicenseExpr"
    right: "LicenseExpr"

    def __str__(self) -> str:
        return f"{_wrap(self.left, Or)} AND {_wrap(self.right, (Or, And))}"


@dataclass(frozen=True)
class Or:
    left: "LicenseExpr"
    right: "LicenseExpr"

    def __str__(self) -> str:
        return f"{self.left} OR {_wrap(self.right, Or)}"


LicenseExpr = Union[LicenseId, WithException, And, Or]


def _wrap(node: LicenseExpr, kinds) -> str:
    return f"({node})" if isinstance(node, kinds) else str(node)


def license_ids(expr: LicenseExpr) -> Iterator[LicenseId]:
    """License identifiers in reading order (exceptions excluded)."""
    if isinstance(expr, LicenseId):
        yield expr
    elif isinstance(expr, WithException):
        yield expr.license
    else:
        yield from license_ids(expr.left)
        yield from license_ids(expr.right)


def exception_ids(expr: LicenseExpr) -> Iterator[str]:
    if isinstance(expr, WithException):
        yield expr.exception
    elif isinstance(expr, (And, Or)):
        yield from exception_ids(expr.left)
        yield from exception_ids(expr.right)


@dataclass(frozen=True)
class _Tok:
    kind: str  # id | op | ( | ) | + | end
    text: str
    pos: int


def tokenize(text: str) -> list[_Tok]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m:
            raise LicenseParseError(f"unknown token {text[pos]!r}", pos)
        start = m.start("id") if m.group("id") else m.start("punct")
        if m.group("id"):
            word = m.group("id")
            if word.upper() in _OPERATORS and word in (word.upper(), word.lower()):
                tokens.append(_Tok("op", word.upper(), start))
            else:
                tokens.append(_Tok("id", word, start))
        else:
            tokens.append(_Tok(m.group("punct"), m.group("punct"), start))
        pos = m.end()
    tokens.append(_Tok("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.tokens[self.i]

    def take(self) -> _Tok:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def is_op(self, name: str) -> bool:
        return self.tok.kind == "op" and self.tok.text == name

    def expr(self) -> LicenseExpr:
        node = self.and_expr()
        while self.is_op("OR"):
            self.take()
            node = Or(node, self.and_expr())
        return node

    def and_expr(self) -> LicenseExpr:
        node = self.with_expr()
        while self.is_op("AND"):
            self.take()
            node = And(node, self.with_expr())
        return node

    def with_expr(self) -> LicenseExpr:
        grouped = self.tok.kind == "("
        node = self.primary()
        if self.is_op("WITH"):
            op = self.take()
            if grouped or not isinstance(node, LicenseId):
                raise LicenseParseError("WITH must follow a single license identifier", op.pos)
            exc = self.take()
            if exc.kind != "id":
                raise LicenseParseError("expected an exception identifier after WITH", exc.pos)
            node = WithException(node, exc.text)
        return node

    def primary(self) -> LicenseExpr:
        tok = self.take()
        if tok.kind == "id":
            if self.tok.kind == "+" and self.tok.pos == tok.pos + len(tok.text):
                self.take()
                return LicenseId(tok.text, or_later=True)
            return LicenseId(tok.text)
        if tok.kind == "(":
            node = self.expr()
            close = self.take()
            if close.kind != ")":
                raise LicenseParseError("unbalanced parentheses: expected ')'", close.pos)
            return node
        if tok.kind == "end":
            raise LicenseParseError("unexpected end of expression", tok.pos)
        if tok.kind == ")":
            raise LicenseParseError("unbalanced parentheses: unexpected ')'", tok.pos)
        raise LicenseParseError(f"unexpected {tok.text!r}", tok.pos)


def parse_license_expr(text: str) -> LicenseExpr:
    parser = _Parser(text)
    if parser.tok.kind == "end":
        raise LicenseParseError("empty license expression", 0)
    node = parser.expr()
    tail = parser.tok
    if tail.kind != "end":
        if tail.kind == ")":
            raise LicenseParseError("unbalanced parentheses: unexpected ')'", tail.pos)
        raise LicenseParseError(f"unexpected {tail.text!r}", tail.pos)
    return node


def format_license_expr(expr: LicenseExpr) -> str:
    return str(expr)
