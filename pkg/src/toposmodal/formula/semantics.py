"""Sort checking and Kripke-Joyal evaluation of modal formulas.

A formula with free variables ``x1:S1, ..., xn:Sn`` denotes a subpresheaf of
``S1 x ... x Sn`` (tuples, in order of first occurrence).  Closed formulas
live over the empty product, whose single element is ``()``, so their value
at a stage is a sieve.

Modalities act fiberwise in one coordinate: ``[]`` keeps a tuple at ``c``
when every related element at every stage below ``c`` (with the other
coordinates restricted along) stays in the value; ``<>`` keeps it when some
related element at ``c`` itself does.  A modality whose body has no free
variable of the relation's sort is the identity.
"""
from __future__ import annotations

from dataclasses import dataclass

from ..errors import (
    AmbiguousModality,
    SortError,
    StageMismatch,
    UnboundVariable,
    UnknownAtom,
    UnknownElement,
    UnknownSort,
)
from ..order import Sieve
from ..power import exists_coordinate, forall_coordinate
from ..presheaf import SubPresheaf, heyting_sub, product
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


# -- sort checking -----------------------------------------------------------


def _relation_sort(sig, name):
    if name not in sig.relations:
        raise UnknownSort(f"unknown relation {name!r}")
    return sig.relations[name]


def resolve_modality(g, sig, sort_of) -> tuple[str, str] | None:
    """Pick the relation and coordinate a modality acts on, or None for identity.

    ``sort_of`` maps the variables in scope to their sorts.
    """
    body_vars = [v for v in free_vars(g.body) if v in sort_of]
    sym = "[]" if isinstance(g, Box) else "<>"
    if g.relation is not None:
        rel = g.relation
        rsort = _relation_sort(sig, rel)
    elif g.var is not None:
        if g.var not in sort_of:
            raise SortError(f"{sym}_{g.var}: variable {g.var!r} is not in scope")
        want = sort_of[g.var]
        if sig.default_relation is not None and sig.relations.get(sig.default_relation) == want:
            rel = sig.default_relation
        else:
            cands = sorted(r for r, s in sig.relations.items() if s == want)
            if not cands:
                raise SortError(f"{sym}_{g.var}: no relation declared on sort {want!r}")
            if len(cands) > 1:
                raise AmbiguousModality(f"{sym}_{g.var}: several relations on {want!r}: {cands}")
            rel = cands[0]
        rsort = want
    elif sig.default_relation is not None:
        rel = sig.default_relation
        rsort = _relation_sort(sig, rel)
    else:
        sorts = {sort_of[v] for v in body_vars}
        cands = sorted(r for r, s in sig.relations.items() if s in sorts)
        if not cands:
            return None
        if len(cands) > 1:
            raise AmbiguousModality(f"{sym} could use any of the relations {cands}; write {sym}{{R}}")
        rel = cands[0]
        rsort = sig.relations[rel]

    if g.var is not None:
        if g.var not in sort_of:
            raise SortError(f"{sym}_{g.var}: variable {g.var!r} is not in scope")
        if sort_of[g.var] != rsort:
            raise SortError(
                f"{sym}_{g.var}: {g.var!r} has sort {sort_of[g.var]!r} but {rel!r} is on {rsort!r}"
            )
        return (rel, g.var) if g.var in body_vars else None
    hits = [v for v in body_vars if sort_of[v] == rsort]
    if not hits:
        return None
    if len(hits) > 1:
        raise AmbiguousModality(f"{sym} could act on any of {hits}; write {sym}_x")
    return rel, hits[0]


def check_formula(f: Formula, sig, free_sorts: dict | None = None) -> dict:
    """Sort-check ``f`` and return the sorts of its free variables.

    Free variable sorts come from ``free_sorts`` when given, otherwise they
    are inferred from atoms and equations.
    """
    inferred = dict(free_sorts or {})
    equations = []

    def note(v, sort, bound):
        if v in bound:
            if bound[v] != sort:
                raise SortError(f"{v!r} has sort {bound[v]!r}, used at sort {sort!r}")
        elif v in inferred and inferred[v] != sort:
            raise SortError(f"{v!r} used at sorts {inferred[v]!r} and {sort!r}")
        else:
            inferred[v] = sort

    def walk(g, bound):
        if isinstance(g, Atom):
            if g.pred not in sig.atoms:
                raise UnknownAtom(f"unknown atom {g.pred!r}")
            note(g.var, sig.atoms[g.pred], bound)
        elif isinstance(g, Eq):
            equations.append((g.left, g.right, dict(bound)))
        elif isinstance(g, (Not, Box, Dia)):
            walk(g.body, bound)
        elif isinstance(g, (And, Or, Implies)):
            walk(g.left, bound)
            walk(g.right, bound)
        elif isinstance(g, (Forall, Exists)):
            if g.sort not in sig.sorts:
                raise UnknownSort(f"unknown sort {g.sort!r}")
            walk(g.body, {**bound, g.var: g.sort})

    walk(f, {})
    changed = True
    while changed:
        changed = False
        for a, b, bound in equations:
            sa = bound.get(a, inferred.get(a))
            sb = bound.get(b, inferred.get(b))
            if sa is not None and sb is not None and sa != sb:
                raise SortError(f"equation {a} = {b} mixes sorts {sa!r} and {sb!r}")
            if sa is None and sb is not None:
                note(a, sb, bound)
                changed = True
            elif sb is None and sa is not None:
                note(b, sa, bound)
                changed = True

    fv = free_vars(f)
    missing = [v for v in fv if v not in inferred]
    if missing:
        raise SortError(f"cannot infer the sort of {', '.join(missing)}")
    sorts = {v: inferred[v] for v in fv}

    def modal(g, scope):
        if isinstance(g, (Box, Dia)):
            resolve_modality(g, sig, scope)
            modal(g.body, scope)
        elif isinstance(g, Not):
            modal(g.body, scope)
        elif isinstance(g, (And, Or, Implies)):
            modal(g.left, scope)
            modal(g.right, scope)
        elif isinstance(g, (Forall, Exists)):
            modal(g.body, {**scope, g.var: g.sort})

    modal(f, {**(free_sorts or {}), **sorts})
    return sorts


def _fresh(base: str, taken) -> str:
    name = base + "'"
    while name in taken:
        name += "'"
    return name


def _all_vars(f: Formula) -> set:
    out = set(free_vars(f))
    if isinstance(f, (Forall, Exists)):
        out.add(f.var)
    for child in ("body", "left", "right"):
        if hasattr(f, child):
            out |= _all_vars(getattr(f, child))
    return out


def desugar(f: Formula, sort_of: dict) -> Formula:
    """Replace every ``E(t)`` by ``exists t':S. t = t'``."""
    taken = _all_vars(f) | set(sort_of)

    def go(g, scope):
        if isinstance(g, ExistsE):
            if g.var not in scope:
                raise SortError(f"cannot infer the sort of {g.var!r}")
            y = _fresh(g.var, taken | set(scope))
            return Exists(y, scope[g.var], Eq(g.var, y))
        if isinstance(g, Not):
            return Not(go(g.body, scope))
        if isinstance(g, (Box, Dia)):
            return type(g)(go(g.body, scope), g.relation, g.var)
        if isinstance(g, (And, Or, Implies)):
            return type(g)(go(g.left, scope), go(g.right, scope))
        if isinstance(g, (Forall, Exists)):
            return type(g)(g.var, g.sort, go(g.body, {**scope, g.var: g.sort}))
        return g

    return go(f, dict(sort_of))


# -- evaluation --------------------------------------------------------------


@dataclass
class Interpretation:
    context: tuple
    value: SubPresheaf

    @property
    def variables(self):
        return tuple(v for v, _ in self.context)

    def table(self, c: str):
        return sorted(self.value(c), key=repr)


def fiber_interior(sub: SubPresheaf, i: int, r) -> SubPresheaf:
    """Hereditary box in coordinate ``i`` of a tuple product."""
    prod = sub.of
    p = prod.base
    out = {}
    for c in p.objects:
        keep = []
        for t in prod.carrier(c):
            ok = True
            for d in p.below(c):
                td = prod.restrict(t, c, d)
                members = sub.members[d]
                for b in r.successors(d, td[i]):
                    if td[:i] + (b,) + td[i + 1:] not in members:
                        ok = False
                        break
                if not ok:
                    break
            if ok:
                keep.append(t)
        out[c] = keep
    return SubPresheaf(prod, out, check=False)


def fiber_closure(sub: SubPresheaf, i: int, r) -> SubPresheaf:
    """Stage-local diamond in coordinate ``i`` of a tuple product."""
    prod = sub.of
    out = {}
    for c in prod.base.objects:
        members = sub.members[c]
        out[c] = [
            t
            for t in prod.carrier(c)
            if any(t[:i] + (b,) + t[i + 1:] in members for b in r.successors(c, t[i]))
        ]
    return SubPresheaf(prod, out, check=False)


class Evaluator:
    """Computes interpretations over one model, caching context products."""

    def __init__(self, model):
        self.model = model
        self.sig = model.signature()
        self._products = {}

    def context_product(self, ctx: tuple):
        sorts = tuple(s for _, s in ctx)
        if sorts not in self._products:
            factors = [self.model.sort(s) for s in sorts]
            self._products[sorts] = product(*factors, base=self.model.poset)
        return self._products[sorts]

    @staticmethod
    def position(ctx, v) -> int:
        for i in range(len(ctx) - 1, -1, -1):
            if ctx[i][0] == v:
                return i
        raise UnboundVariable(f"variable {v!r} is not bound")

    def value(self, f: Formula, ctx: tuple) -> SubPresheaf:
        prod = self.context_product(ctx)
        if isinstance(f, Top):
            return SubPresheaf.full(prod)
        if isinstance(f, Bottom):
            return SubPresheaf.empty(prod)
        if isinstance(f, Atom):
            i = self.position(ctx, f.var)
            atom = self.model.atom(f.pred)
            if self.model.atom_sorts[f.pred] != ctx[i][1]:
                raise SortError(f"{f.pred}({f.var}): {f.var!r} has sort {ctx[i][1]!r}")
            return SubPresheaf(
                prod,
                {c: [t for t in prod.carrier(c) if t[i] in atom.members[c]] for c in prod.base.objects},
                check=False,
            )
        if isinstance(f, Eq):
            i, j = self.position(ctx, f.left), self.position(ctx, f.right)
            if ctx[i][1] != ctx[j][1]:
                raise SortError(f"{f.left} = {f.right} mixes sorts {ctx[i][1]!r} and {ctx[j][1]!r}")
            return SubPresheaf(
                prod, {c: [t for t in prod.carrier(c) if t[i] == t[j]] for c in prod.base.objects}, check=False
            )
        if isinstance(f, ExistsE):
            i = self.position(ctx, f.var)
            return self.value(desugar(f, {f.var: ctx[i][1]}), ctx)
        if isinstance(f, Not):
            return heyting_sub("neg", self.value(f.body, ctx))
        if isinstance(f, And):
            return heyting_sub("meet", self.value(f.left, ctx), self.value(f.right, ctx))
        if isinstance(f, Or):
            return heyting_sub("join", self.value(f.left, ctx), self.value(f.right, ctx))
        if isinstance(f, Implies):
            return heyting_sub("implies", self.value(f.left, ctx), self.value(f.right, ctx))
        if isinstance(f, (Forall, Exists)):
            self.model.sort(f.sort)
            inner = ctx + ((f.var, f.sort),)
            body = self.value(f.body, inner)
            quant = forall_coordinate if isinstance(f, Forall) else exists_coordinate
            return quant(body, len(ctx), prod)
        if isinstance(f, (Box, Dia)):
            scope = {}
            for v, s in ctx:
                scope[v] = s
            body = self.value(f.body, ctx)
            target = resolve_modality(f, self.sig, scope)
            if target is None:
                return body
            rel, var = target
            i = self.position(ctx, var)
            op = fiber_interior if isinstance(f, Box) else fiber_closure
            return op(body, i, self.model.relation(rel))
        raise TypeError(f"not a formula: {f!r}")


def _as_formula(f, model):
    if isinstance(f, str):
        from .parser import parse

        return parse(f, model.signature(), check_sorts=False)
    return f


def interpret(f, model, context=None, evaluator: Evaluator | None = None) -> Interpretation:
    """Interpretation of ``f`` over its free-variable context.

    ``context`` is an optional sequence of ``(var, sort)`` pairs; it must
    cover every free variable.
    """
    f = _as_formula(f, model)
    ev = evaluator or Evaluator(model)
    if context is None:
        sorts = check_formula(f, ev.sig)
        context = tuple(sorts.items())
    else:
        context = tuple((v, s) for v, s in context)
        given = dict(context)
        missing = [v for v in free_vars(f) if v not in given]
        if missing:
            raise UnboundVariable(f"context does not bind {', '.join(missing)}")
        check_formula(f, ev.sig, given)
    return Interpretation(context, ev.value(f, context))


@dataclass
class ForceResult:
    stage: str
    bindings: dict
    sieve: Sieve
    verdict: bool


def _coerce(x, c, raw):
    if x.has(c, raw):
        return raw
    for a in x.carrier(c):
        if str(a) == str(raw):
            return a
    for d in x.base.objects:
        if any(a == raw or str(a) == str(raw) for a in x.carrier(d)):
            raise StageMismatch(f"{raw!r} is not an element at stage {c!r} (it lives at {d!r})")
    raise UnknownElement(f"{raw!r} is not an element of {x.name or 'the sort'}")


def _env_sorts(f, model, sig, stage, env) -> dict:
    """Sorts for free variables that only an environment can pin down, as in ``E(h)``."""
    try:
        check_formula(f, sig)
        return {}
    except SortError:
        pass
    out = {}
    for v in free_vars(f):
        hits = [
            name
            for name, x in sorted(model.sorts.items())
            if name != "1" and any(str(a) == str(env[v]) for a in x.carrier(stage))
        ]
        if len(hits) == 1:
            out[v] = hits[0]
    return out


def force(
    f, model, stage: str, env: dict | None = None, evaluator: Evaluator | None = None, sorts: dict | None = None
) -> ForceResult:
    """Membership sieve of the bound tuple in the interpretation at ``stage``.

    ``sorts`` declares sorts for environment variables; a declared variable
    stays in the context even when it is not free, so ``[]_a true`` resolves.
    """
    f = _as_formula(f, model)
    env = dict(env or {})
    declared = dict(sorts or {})
    ev = evaluator or Evaluator(model)
    p = model.poset
    p.check(stage)
    fv = free_vars(f)
    missing = [v for v in list(fv) + list(declared) if v not in env]
    if missing:
        raise UnboundVariable(f"no binding for {', '.join(missing)}")
    given = {**_env_sorts(f, model, ev.sig, stage, env), **declared}
    inferred = check_formula(f, ev.sig, given)
    context = tuple((v, inferred[v]) for v in fv) + tuple((v, s) for v, s in declared.items() if v not in fv)
    t = tuple(_coerce(model.sort(s), stage, env[v]) for v, s in context)
    value = ev.value(f, context)
    prod = value.of
    members = frozenset(d for d in p.below(stage) if prod.restrict(t, stage, d) in value.members[d])
    sieve = Sieve(stage, members)
    return ForceResult(stage, dict(zip((v for v, _ in context), t)), sieve, sieve.is_total(p))


def stage_table(f, model, evaluator: Evaluator | None = None) -> dict:
    """Sieve of a closed formula at every stage, in object order."""
    f = _as_formula(f, model)
    fv = free_vars(f)
    if fv:
        raise UnboundVariable(f"formula has free variables {', '.join(fv)}")
    ev = evaluator or Evaluator(model)
    check_formula(f, ev.sig)
    value = ev.value(f, ())
    p = model.poset
    table = {}
    for c in p.objects:
        # a closed value is a subpresheaf of 1, i.e. a downset of stages
        table[c] = Sieve(c, frozenset(d for d in p.below(c) if value.members[d]))
    return table


def is_valid(table: dict, p) -> bool:
    return all(s.is_total(p) for s in table.values())
