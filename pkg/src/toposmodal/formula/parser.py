"""Recursive-descent parser for the ASCII modal formula syntax.

Grammar, loosest binding first::

    formula  := implies
    implies  := disj ( "->" implies )?
    disj     := conj ( "\\/" conj )*
    conj     := unary ( "/\\" unary )*
    unary    := "~" unary | BOX unary | DIA unary | quant | atomic
    quant    := ("forall" | "exists") IDENT ":" SORT "." formula
    atomic   := "true" | "false" | "E" "(" IDENT ")" | IDENT "(" IDENT ")"
              | IDENT "=" IDENT | "(" formula ")"
    SORT     := IDENT | DIGITS                         (the terminal sort is "1")
    BOX      := "[]" ("{" IDENT "}")? ("_" IDENT)?      (DIA likewise with "<>")

A quantifier body extends as far right as possible.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import AmbiguousModality, ParseError
from .syntax import (
    And,
    Atom,
    Bottom,
    Box,
    Dia,
    Eq,
    Exists,
    ExistsE,
    Forall,
    Formula,
    Implies,
    Not,
    Or,
    Top,
    free_vars,
)

IDENT = r"[A-Za-z_][A-Za-z0-9_']*"
TOKEN_RE = re.compile(
    rf"""
    (?P<ws>\s+)
  | (?P<modal>(?:\[\]|<>)(?:\{{{IDENT}\}})?(?:_{IDENT})?)
  | (?P<op>/\\|\\/|->|~|\(|\)|:|\.|=)
  | (?P<ident>{IDENT})
  | (?P<num>[0-9]+)
    """,
    re.VERBOSE,
)
MODAL_RE = re.compile(rf"(\[\]|<>)(?:\{{({IDENT})\}})?(?:_({IDENT}))?")
KEYWORDS = {"forall", "exists", "true", "false"}


@dataclass
class Token:
    kind: str
    text: str
    pos: int


def _line_col(text: str, pos: int) -> tuple[int, int]:
    line = text.count("\n", 0, pos) + 1
    col = pos - (text.rfind("\n", 0, pos) + 1) + 1
    return line, col


def tokenize(text: str) -> list[Token]:
    out = []
    pos = 0
    while pos < len(text):
        m = TOKEN_RE.match(text, pos)
        if m is None:
            line, col = _line_col(text, pos)
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        if kind != "ws":
            tok = m.group()
            if kind == "ident" and tok in KEYWORDS:
                kind = tok
            out.append(Token(kind if kind != "op" else tok, tok, pos))
        pos = m.end()
    out.append(Token("eof", "", len(text)))
    return out


class Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0

    def peek(self, k=0) -> Token:
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        line, col = _line_col(self.text, tok.pos)
        raise ParseError(msg, line, col)

    def expect(self, kind) -> Token:
        tok = self.peek()
        if tok.kind != kind:
            want = "identifier" if kind == "ident" else repr(kind)
            got = "end of input" if tok.kind == "eof" else repr(tok.text)
            self.error(f"expected {want}, found {got}")
        self.i += 1
        return tok

    def parse(self) -> Formula:
        f = self.implies()
        if self.peek().kind != "eof":
            self.error(f"unexpected {self.peek().text!r}")
        return f

    def implies(self) -> Formula:
        start = self.peek().pos
        left = self.disj()
        if self.peek().kind == "->":
            self.i += 1
            right = self.implies()
            return Implies(left, right, span=(start, self.peek().pos))
        return left

    def disj(self) -> Formula:
        start = self.peek().pos
        left = self.conj()
        while self.peek().kind == "\\/":
            self.i += 1
            left = Or(left, self.conj(), span=(start, self.peek().pos))
        return left

    def conj(self) -> Formula:
        start = self.peek().pos
        left = self.unary()
        while self.peek().kind == "/\\":
            self.i += 1
            left = And(left, self.unary(), span=(start, self.peek().pos))
        return left

    def unary(self) -> Formula:
        tok = self.peek()
        if tok.kind == "~":
            self.i += 1
            return Not(self.unary(), span=(tok.pos, self.peek().pos))
        if tok.kind == "modal":
            self.i += 1
            sym, rel, var = MODAL_RE.fullmatch(tok.text).groups()
            body = self.unary()
            cls = Box if sym == "[]" else Dia
            return cls(body, rel, var, span=(tok.pos, self.peek().pos))
        if tok.kind in ("forall", "exists"):
            self.i += 1
            var = self.expect("ident").text
            self.expect(":")
            sort = self.peek()
            if sort.kind not in ("ident", "num"):
                self.expect("ident")
            self.i += 1
            sort = sort.text
            self.expect(".")
            body = self.implies()
            cls = Forall if tok.kind == "forall" else Exists
            return cls(var, sort, body, span=(tok.pos, self.peek().pos))
        return self.atomic()

    def atomic(self) -> Formula:
        tok = self.peek()
        if tok.kind == "true":
            self.i += 1
            return Top(span=(tok.pos, tok.pos + 4))
        if tok.kind == "false":
            self.i += 1
            return Bottom(span=(tok.pos, tok.pos + 5))
        if tok.kind == "(":
            self.i += 1
            f = self.implies()
            self.expect(")")
            return f
        if tok.kind == "ident":
            self.i += 1
            nxt = self.peek()
            if nxt.kind == "(":
                self.i += 1
                arg = self.expect("ident").text
                end = self.expect(")")
                if tok.text == "E":
                    return ExistsE(arg, span=(tok.pos, end.pos + 1))
                return Atom(tok.text, arg, span=(tok.pos, end.pos + 1))
            if nxt.kind == "=":
                self.i += 1
                right = self.expect("ident")
                return Eq(tok.text, right.text, span=(tok.pos, right.pos + len(right.text)))
            self.error(f"expected '(' or '=' after {tok.text!r}", nxt)
        if tok.kind == "eof":
            self.error("unexpected end of input")
        self.error(f"unexpected {tok.text!r}")


def _check_modalities(f: Formula, text: str, scope=frozenset()):
    """A bare modality needs some variable in scope to act on."""
    if isinstance(f, (Box, Dia)):
        if f.relation is None and f.var is None and not scope and not free_vars(f.body):
            pos = f.span[0] if f.span else 0
            line, col = _line_col(text, pos)
            sym = "[]" if isinstance(f, Box) else "<>"
            raise AmbiguousModality(f"{sym} at line {line}, column {col} has no sorted variable in scope")
        _check_modalities(f.body, text, scope)
    elif isinstance(f, Not):
        _check_modalities(f.body, text, scope)
    elif isinstance(f, (And, Or, Implies)):
        _check_modalities(f.left, text, scope)
        _check_modalities(f.right, text, scope)
    elif isinstance(f, (Forall, Exists)):
        _check_modalities(f.body, text, scope | {f.var})


def parse(text: str, signature=None, check_sorts: bool = True) -> Formula:
    """Parse ``text``; with a ``signature`` also sort-check and resolve modalities.

    A bare modality with nothing in scope is rejected unless the signature
    names a default relation, in which case it is the identity.
    """
    f = Parser(text).parse()
    if signature is None or signature.default_relation is None:
        _check_modalities(f, text)
    if signature is not None and check_sorts:
        from .semantics import check_formula

        check_formula(f, signature)
    return f
