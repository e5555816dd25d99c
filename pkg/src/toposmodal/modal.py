"""Interior (necessity) and closure (possibility) operators on power objects,
a categorical-composite oracle for both, and exhaustive law checkers.

For a relation ``(X, R)`` and ``s`` in ``PX(c)``:

* ``interior(s)(d)`` holds ``a`` when for every ``d' <= d`` and every ``b``
  with ``a.d' R b`` we have ``b in s(d')``;
* ``closure(s)(d)`` holds ``a`` when some ``b in s(d)`` has ``a R b``.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable

from .errors import BudgetExceeded, StageMismatch
from .power import (
    InclusionOrder,
    InternalRelation,
    RelSub,
    direct_image,
    downarrow,
    inverse_image,
    join,
    power_elements,
    power_presheaf,
    segment_map,
)
from .presheaf import Presheaf, subobject_violations

DEFAULT_LIMIT = 4096
DEFAULT_PAIR_LIMIT = 1 << 16


@dataclass
class RelationReport:
    stages: dict
    subpresheaf_violations: list
    reflexive_failures: list = field(default_factory=list)
    symmetric_failures: list = field(default_factory=list)
    transitive_failures: list = field(default_factory=list)

    @property
    def reflexive(self):
        return not self.reflexive_failures

    @property
    def symmetric(self):
        return not self.symmetric_failures

    @property
    def transitive(self):
        return not self.transitive_failures

    @property
    def preorder(self):
        return self.reflexive and self.transitive and not self.subpresheaf_violations

    @property
    def equivalence(self):
        return self.preorder and self.symmetric


def check_relation(r: InternalRelation) -> RelationReport:
    """Stage-by-stage reflexivity, symmetry, transitivity, plus restriction-closure."""
    x = r.on
    report = RelationReport(stages={}, subpresheaf_violations=subobject_violations(r.graph))
    for c in x.base.objects:
        g = r.graph.members[c]
        elems = x.carrier(c)
        refl = [a for a in elems if (a, a) not in g]
        sym = [(a, b) for a in elems for b in elems if (a, b) in g and (b, a) not in g]
        trans = [
            (a, b, e)
            for a in elems
            for b in elems
            if (a, b) in g
            for e in elems
            if (b, e) in g and (a, e) not in g
        ]
        report.stages[c] = {
            "reflexive": not refl,
            "symmetric": not sym,
            "transitive": not trans,
        }
        report.reflexive_failures += [(c, a) for a in refl]
        report.symmetric_failures += [(c, a, b) for a, b in sym]
        report.transitive_failures += [(c, a, b, e) for a, b, e in trans]
    return report


class _StageTables:
    """Per-stage bit tables: hereditary upper neighbourhoods and stage-local successors."""

    def __init__(self, r: InternalRelation, c: str):
        x = r.on
        cells = x.cells(c)
        self.cells = cells
        up, nbr = [], []
        for d, a in cells.cells:
            m = 0
            for e in x.base.below(d):
                ae = x.restrict(a, d, e)
                for b in r.successors(e, ae):
                    m |= 1 << cells.index[(e, b)]
            up.append(m)
            n = 0
            for b in r.successors(d, a):
                n |= 1 << cells.index[(d, b)]
            nbr.append(n)
        self.up = tuple(up)
        self.nbr = tuple(nbr)
        self.n = len(cells)

    def interior(self, mask: int) -> int:
        out = 0
        for i, u in enumerate(self.up):
            if not u & ~mask:
                out |= 1 << i
        return out

    def closure(self, mask: int) -> int:
        out = 0
        for i, u in enumerate(self.nbr):
            if u & mask:
                out |= 1 << i
        return out


class ModalContext:
    """A presheaf with a relation; ``mode`` picks the fast formulas or the oracle."""

    def __init__(self, x: Presheaf, r: InternalRelation, mode: str = "fast", oracle_limit: int = DEFAULT_LIMIT):
        if r.on is not x and r.on != x:
            raise ValueError("relation does not live on the given presheaf")
        if mode not in ("fast", "oracle"):
            raise ValueError(f"unknown mode {mode!r}")
        self.x = x
        self.r = r
        self.mode = mode
        self.oracle_limit = oracle_limit
        self._tables = {}
        self._power = None
        self._segments = {}

    def tables(self, c: str) -> _StageTables:
        t = self._tables.get(c)
        if t is None:
            t = self._tables[c] = _StageTables(self.r, c)
        return t

    def power(self) -> Presheaf:
        if self._power is None:
            self._power = power_presheaf(self.x, self.oracle_limit)
        return self._power

    def segments(self, direction: str):
        f = self._segments.get(direction)
        if f is None:
            f = self._segments[direction] = segment_map(self.r, self.power(), direction)
        return f

    def interior(self, s: RelSub) -> RelSub:
        return interior(self, s)

    def closure(self, s: RelSub) -> RelSub:
        return closure(self, s)


def _check_arg(ctx: ModalContext, s: RelSub):
    if s.of is not ctx.x and s.of != ctx.x:
        raise StageMismatch("RelSub does not live over the context presheaf")


def interior(ctx: ModalContext, s: RelSub) -> RelSub:
    _check_arg(ctx, s)
    if ctx.mode == "oracle":
        return interior_oracle(ctx, s)
    return RelSub(ctx.x, s.at, ctx.tables(s.at).interior(s.mask))


def closure(ctx: ModalContext, s: RelSub) -> RelSub:
    _check_arg(ctx, s)
    if ctx.mode == "oracle":
        return closure_oracle(ctx, s)
    return RelSub(ctx.x, s.at, ctx.tables(s.at).closure(s.mask))


def interior_stage_local(ctx: ModalContext, s: RelSub) -> dict:
    """Diagnostic: the necessity formula quantified at each stage alone.

    The result need not be closed under restriction, so it is returned as a
    plain ``{stage: set}`` mapping rather than a :class:`RelSub`.
    """
    _check_arg(ctx, s)
    x, r = ctx.x, ctx.r
    out = {}
    for d in x.base.below(s.at):
        sd = s(d)
        out[d] = frozenset(a for a in x.carrier(d) if all(b in sd for b in r.successors(d, a)))
    return out


def interior_oracle(ctx: ModalContext, s: RelSub) -> RelSub:
    """Inverse image along the upper-segment map of the lower segment of ``s`` in ``PX``."""
    _check_arg(ctx, s)
    px = ctx.power()
    segment_of_s = downarrow(InclusionOrder(px), s, s.at)
    return inverse_image(ctx.segments("up"), segment_of_s)


def closure_oracle(ctx: ModalContext, s: RelSub) -> RelSub:
    """Join of the direct image of ``s`` along the lower-segment map."""
    _check_arg(ctx, s)
    family = direct_image(ctx.segments("down"), s)
    return join(family, ctx.x)


# ---------------------------------------------------------------- law checks


@dataclass
class Witness:
    stage: str
    s: RelSub
    element: tuple
    u: RelSub | None = None

    def describe(self) -> str:
        parts = [f"stage={self.stage}", f"s={_fmt(self.s)}"]
        if self.u is not None:
            parts.append(f"u={_fmt(self.u)}")
        d, a = self.element
        parts.append(f"element={a} at {d}")
        return ", ".join(parts)


def _fmt(s: RelSub) -> str:
    return "{" + "; ".join(f"{d}: {sorted(map(str, v))}" for d, v in s.members.items()) + "}"


@dataclass
class LawVerdict:
    name: str
    holds: bool
    witness: Witness | None = None
    regime: str = "exhaustive"
    checked: int = 0
    vacuous: bool = False


@dataclass
class LawReport:
    laws: dict = field(default_factory=dict)
    regime: str = "exhaustive"
    seed: int = 0

    @property
    def all_hold(self) -> bool:
        return all(v.holds for v in self.laws.values())

    def failures(self):
        return [v for v in self.laws.values() if not v.holds]

    def __getitem__(self, name) -> LawVerdict:
        return self.laws[name]


class _Ops:
    def __init__(self, ctx: ModalContext, c: str):
        self.ctx = ctx
        self.c = c
        if ctx.mode == "fast":
            t = ctx.tables(c)
            self.int = t.interior
            self.cl = t.closure
        else:
            x = ctx.x
            self.int = lambda m: interior_oracle(ctx, RelSub(x, c, m)).mask
            self.cl = lambda m: closure_oracle(ctx, RelSub(x, c, m)).mask


# name -> (arity, relation, (ops, s, u) -> (lhs, rhs)); relation "le" or "eq"
LAWS: dict[str, tuple[str, str, Callable]] = {
    "interior_counit": ("unary", "le", lambda o, s, u: (o.int(s), s)),
    "interior_comultiplication": ("unary", "le", lambda o, s, u: (o.int(s), o.int(o.int(s)))),
    "closure_unit": ("unary", "le", lambda o, s, u: (s, o.cl(s))),
    "closure_multiplication": ("unary", "le", lambda o, s, u: (o.cl(o.cl(s)), o.cl(s))),
    "strength": ("pair", "le", lambda o, s, u: (o.int(s) & o.cl(u), o.cl(o.int(s) & u))),
    "interior_monotone": ("cover", "le", lambda o, s, u: (o.int(s), o.int(u))),
    "closure_monotone": ("cover", "le", lambda o, s, u: (o.cl(s), o.cl(u))),
    "adjunction_unit": ("unary", "le", lambda o, s, u: (s, o.int(o.cl(s)))),
    "adjunction_counit": ("unary", "le", lambda o, s, u: (o.cl(o.int(s)), s)),
    "interior_idempotent": ("unary", "eq", lambda o, s, u: (o.int(o.int(s)), o.int(s))),
    "closure_idempotent": ("unary", "eq", lambda o, s, u: (o.cl(o.cl(s)), o.cl(s))),
    "frobenius": ("pair", "eq", lambda o, s, u: (o.cl(s & o.int(u)), o.cl(s) & o.int(u))),
    "distributivity": ("unary", "le", lambda o, s, u: (o.cl(o.int(s)), o.int(o.cl(s)))),
}

IS4_LAWS = (
    "interior_counit",
    "interior_comultiplication",
    "closure_unit",
    "closure_multiplication",
    "strength",
    "interior_monotone",
    "closure_monotone",
)
MAO_LAWS = (
    "adjunction_unit",
    "adjunction_counit",
    "interior_idempotent",
    "closure_idempotent",
    "frobenius",
    "distributivity",
)


def _violation(kind, lhs, rhs) -> int:
    if kind == "le":
        return lhs & ~rhs
    return lhs ^ rhs


def _lowest_bit(mask: int) -> int:
    return (mask & -mask).bit_length() - 1


def _stage_masks(ctx: ModalContext, c: str, limit: int, rng: random.Random):
    """Closed masks at ``c``: all of them when few enough, else a seeded sample."""
    elems = power_elements(ctx.x, c, limit)
    if not elems.truncated:
        return [s.mask for s in elems], "exhaustive"
    cells = ctx.x.cells(c)
    seen = set()
    out = []
    for _ in range(limit):
        m = cells.closure(rng.getrandbits(len(cells)) if len(cells) else 0)
        if m not in seen:
            seen.add(m)
            out.append(m)
    out.sort()
    return out, "sampled"


def _partners(ctx, c, masks, kind, pair_limit, rng):
    cells = ctx.x.cells(c)
    if kind == "pair":
        if len(masks) ** 2 <= pair_limit:
            return None, "exhaustive"
        gens = sorted({cells.orbit[i] for i in range(len(cells))} | {0})
        extra = sorted(rng.sample(masks, min(len(masks), 64)))
        return sorted(set(gens) | set(extra)), "generators+sampled"
    return None, "exhaustive"


def _check_laws(ctx: ModalContext, names, limit=DEFAULT_LIMIT, pair_limit=DEFAULT_PAIR_LIMIT, seed=0) -> LawReport:
    rng = random.Random(seed)
    report = LawReport(seed=seed)
    verdicts = {n: LawVerdict(n, True) for n in names}
    regimes = {n: set() for n in names}
    any_cells = False
    for c in ctx.x.base.objects:
        masks, regime = _stage_masks(ctx, c, limit, rng)
        cells = ctx.x.cells(c)
        any_cells = any_cells or len(cells) > 0
        ops = _Ops(ctx, c)
        for name in names:
            v = verdicts[name]
            arity, kind, fn = LAWS[name]
            regimes[name].add(regime)
            if not v.holds:
                continue
            if arity == "unary":
                for s in masks:
                    v.checked += 1
                    lhs, rhs = fn(ops, s, None)
                    bad = _violation(kind, lhs, rhs)
                    if bad:
                        v.holds = False
                        v.witness = Witness(c, RelSub(ctx.x, c, s), cells.cells[_lowest_bit(bad)])
                        break
            elif arity == "cover":
                for s in masks:
                    for i in range(len(cells)):
                        if s >> i & 1 or cells.orbit[i] & ~s != 1 << i:
                            continue
                        u = s | (1 << i)
                        v.checked += 1
                        lhs, rhs = fn(ops, s, u)
                        bad = _violation(kind, lhs, rhs)
                        if bad:
                            v.holds = False
                            v.witness = Witness(c, RelSub(ctx.x, c, s), cells.cells[_lowest_bit(bad)], RelSub(ctx.x, c, u))
                            break
                    if not v.holds:
                        break
            else:
                partners, pregime = _partners(ctx, c, masks, arity, pair_limit, rng)
                regimes[name].add(pregime)
                us = masks if partners is None else partners
                for s in masks:
                    for u in us:
                        v.checked += 1
                        lhs, rhs = fn(ops, s, u)
                        bad = _violation(kind, lhs, rhs)
                        if bad:
                            v.holds = False
                            v.witness = Witness(c, RelSub(ctx.x, c, s), cells.cells[_lowest_bit(bad)], RelSub(ctx.x, c, u))
                            break
                    if not v.holds:
                        break
    for name, v in verdicts.items():
        rs = regimes[name] - {"exhaustive"}
        v.regime = "exhaustive" if not rs else "+".join(sorted(rs))
        v.vacuous = not any_cells
        report.laws[name] = v
    report.regime = "exhaustive" if all(v.regime == "exhaustive" for v in verdicts.values()) else "sampled"
    return report


def check_is4(ctx: ModalContext, limit=DEFAULT_LIMIT, pair_limit=DEFAULT_PAIR_LIMIT, seed=0) -> LawReport:
    """Counit, comultiplication, unit, multiplication, strength and monotonicity."""
    return _check_laws(ctx, IS4_LAWS, limit, pair_limit, seed)


def check_mao(ctx: ModalContext, limit=DEFAULT_LIMIT, pair_limit=DEFAULT_PAIR_LIMIT, seed=0) -> LawReport:
    """Adjunction unit/counit, idempotence, Frobenius and distributivity."""
    return _check_laws(ctx, MAO_LAWS, limit, pair_limit, seed)


def expected_laws(report: RelationReport) -> set:
    """Laws a relation with these frame properties must satisfy."""
    out = set()
    if report.preorder:
        out |= set(IS4_LAWS)
    if report.equivalence:
        out |= set(MAO_LAWS)
    return out


def find_counterexample(ctx: ModalContext, law: str, budget: int = 100_000) -> Witness | None:
    """First witness in canonical order; ``None`` means the law was proved by exhaustion.

    Raises :class:`BudgetExceeded` when ``budget`` evaluations run out first.
    """
    if law not in LAWS:
        raise KeyError(f"unknown law {law!r}; expected one of {sorted(LAWS)}")
    arity, kind, fn = LAWS[law]
    spent = 0
    for c in ctx.x.base.objects:
        cells = ctx.x.cells(c)
        ops = _Ops(ctx, c)
        masks = list(cells.closed_masks())
        for s in masks:
            if arity == "unary":
                partners = [None]
            elif arity == "cover":
                partners = [
                    s | (1 << i)
                    for i in range(len(cells))
                    if not s >> i & 1 and cells.orbit[i] & ~s == 1 << i
                ]
            else:
                partners = masks
            for u in partners:
                if spent >= budget:
                    raise BudgetExceeded(f"no witness for {law} within {budget} evaluations")
                spent += 1
                lhs, rhs = fn(ops, s, u)
                bad = _violation(kind, lhs, rhs)
                if bad:
                    return Witness(
                        c,
                        RelSub(ctx.x, c, s),
                        cells.cells[_lowest_bit(bad)],
                        None if u is None else RelSub(ctx.x, c, u),
                    )
    return None


def oracle_agrees(ctx: ModalContext, c: str | None = None) -> tuple[bool, RelSub | None]:
    """Compare fast and oracle operators on every element of ``PX``.

    Returns ``(True, None)`` or ``(False, first disagreeing element)``.
    """
    stages = ctx.x.base.objects if c is None else (c,)
    px = ctx.power()
    for stage in stages:
        t = ctx.tables(stage)
        for s in px.carrier(stage):
            if interior_oracle(ctx, s).mask != t.interior(s.mask):
                return False, s
            if closure_oracle(ctx, s).mask != t.closure(s.mask):
                return False, s
    return True, None
