"""Formula AST and the canonical printer.

Spans are carried for error messages but excluded from equality, so a
printed-then-reparsed formula compares equal to the original.
"""
from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Formula:
    pass


def _span():
    return field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Top(Formula):
    span: tuple | None = _span()


@dataclass(frozen=True)
class Bottom(Formula):
    span: tuple | None = _span()


@dataclass(frozen=True)
class Atom(Formula):
    pred: str
    var: str
    span: tuple | None = _span()


@dataclass(frozen=True)
class Eq(Formula):
    left: str
    right: str
    span: tuple | None = _span()


@dataclass(frozen=True)
class ExistsE(Formula):
    """Existence predicate ``E(t)``; desugars to ``exists y. t = y``."""

    var: str
    span: tuple | None = _span()


@dataclass(frozen=True)
class Not(Formula):
    body: Formula
    span: tuple | None = _span()


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula
    span: tuple | None = _span()


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula
    span: tuple | None = _span()


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula
    span: tuple | None = _span()


@dataclass(frozen=True)
class Box(Formula):
    body: Formula
    relation: str | None = None
    var: str | None = None
    span: tuple | None = _span()


@dataclass(frozen=True)
class Dia(Formula):
    body: Formula
    relation: str | None = None
    var: str | None = None
    span: tuple | None = _span()


@dataclass(frozen=True)
class Forall(Formula):
    var: str
    sort: str
    body: Formula
    span: tuple | None = _span()


@dataclass(frozen=True)
class Exists(Formula):
    var: str
    sort: str
    body: Formula
    span: tuple | None = _span()


BINARY = {And: "/\\", Or: "\\/", Implies: "->"}
PREC = {Implies: 1, Or: 2, And: 3}
UNARY_PREC = 4


def free_vars(f: Formula) -> list[str]:
    """Free variables in order of first occurrence."""
    out: list[str] = []

    def walk(g, bound):
        if isinstance(g, Atom):
            names = [g.var]
        elif isinstance(g, Eq):
            names = [g.left, g.right]
        elif isinstance(g, ExistsE):
            names = [g.var]
        elif isinstance(g, (Not, Box, Dia)):
            walk(g.body, bound)
            return
        elif isinstance(g, (And, Or, Implies)):
            walk(g.left, bound)
            walk(g.right, bound)
            return
        elif isinstance(g, (Forall, Exists)):
            walk(g.body, bound | {g.var})
            return
        else:
            return
        for n in names:
            if n not in bound and n not in out:
                out.append(n)

    walk(f, frozenset())
    return out


def to_text(f: Formula) -> str:
    return _show(f, 0)


def _modal_prefix(sym, g):
    s = sym
    if g.relation is not None:
        s += "{" + g.relation + "}"
    if g.var is not None:
        s += "_" + g.var + " "
    return s


def _show(f: Formula, ctx: int) -> str:
    if isinstance(f, Top):
        return "true"
    if isinstance(f, Bottom):
        return "false"
    if isinstance(f, Atom):
        return f"{f.pred}({f.var})"
    if isinstance(f, Eq):
        return f"{f.left} = {f.right}"
    if isinstance(f, ExistsE):
        return f"E({f.var})"
    if isinstance(f, Not):
        return "~" + _show(f.body, UNARY_PREC)
    if isinstance(f, Box):
        return _modal_prefix("[]", f) + _show(f.body, UNARY_PREC)
    if isinstance(f, Dia):
        return _modal_prefix("<>", f) + _show(f.body, UNARY_PREC)
    if isinstance(f, (Forall, Exists)):
        kw = "forall" if isinstance(f, Forall) else "exists"
        text = f"{kw} {f.var}:{f.sort}. {_show(f.body, 0)}"
        return text if ctx == 0 else f"({text})"
    op = type(f)
    if op in BINARY:
        prec = PREC[op]
        if op is Implies:
            left, right = _show(f.left, prec + 1), _show(f.right, prec)
        else:
            left, right = _show(f.left, prec), _show(f.right, prec + 1)
        text = f"{left} {BINARY[op]} {right}"
        return text if ctx <= prec else f"({text})"
    raise TypeError(f"not a formula: {f!r}")


def conj(*parts: Formula) -> Formula:
    out = parts[0]
    for p in parts[1:]:
        out = And(out, p)
    return out
