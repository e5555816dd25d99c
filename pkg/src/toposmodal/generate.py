"""Seeded random posets, presheaves, relations, models and formulas.

Everything takes a ``random.Random`` so suites are reproducible from one seed.
"""
from __future__ import annotations

import random
from itertools import product as cartesian

from .formula.syntax import (
    And,
    Atom,
    Bottom,
    Box,
    Dia,
    Eq,
    Exists,
    ExistsE,
    Forall,
    Implies,
    Not,
    Or,
    Top,
    free_vars,
)
from .model import Model
from .order import FinPoset
from .power import InternalRelation
from .presheaf import Presheaf, SubPresheaf


def random_poset(rng: random.Random, max_objects: int = 4, density: float = 0.5) -> FinPoset:
    n = rng.randint(1, max_objects)
    objects = [f"o{i}" for i in range(n)]
    covers = [(objects[i], objects[j]) for i in range(n) for j in range(i + 1, n) if rng.random() < density]
    return FinPoset.from_covers(objects, covers)


def _restrict(maps, p, a, c, d):
    while c != d:
        e = next(e for e in p.lower_covers(c) if p.leq(d, e))
        a = maps[(c, e)][a]
        c = e
    return a


def random_presheaf(rng: random.Random, p: FinPoset, max_size: int = 3, name: str = "X") -> Presheaf:
    """Built bottom-up: each new element is a compatible choice of restrictions."""
    carriers, maps = {}, {}
    for c in p.linear_extension():
        lower = p.lower_covers(c)
        want = rng.randint(1 if not lower else 0, max_size)
        if not lower:
            carriers[c] = tuple(f"x{i}" for i in range(max(want, rng.randint(0, 1))))
            continue
        options = [carriers[e] for e in lower]
        families = []
        for fam in cartesian(*options):
            if all(
                _restrict(maps, p, b1, e1, d) == _restrict(maps, p, b2, e2, d)
                for i, (e1, b1) in enumerate(zip(lower, fam))
                for e2, b2 in list(zip(lower, fam))[i + 1:]
                for d in p.below(e1)
                if p.leq(d, e2)
            ):
                families.append(fam)
        chosen = [rng.choice(families) for _ in range(want)] if families else []
        carriers[c] = tuple(f"x{i}" for i in range(len(chosen)))
        for e_i, e in enumerate(lower):
            maps[(c, e)] = {f"x{i}": fam[e_i] for i, fam in enumerate(chosen)}
    return Presheaf(p, carriers, maps, name=name)


def random_subobject(rng: random.Random, x: Presheaf, density: float = 0.5) -> SubPresheaf:
    """A random pointwise subset, closed downward under restriction."""
    p = x.base
    members = {c: {a for a in x.carrier(c) if rng.random() < density} for c in p.objects}
    for c in p.objects:
        for a in list(members[c]):
            for d in p.below(c):
                members[d].add(x.restrict(a, c, d))
    return SubPresheaf(x, members)


def closed_relation(x: Presheaf, seeds: dict, reflexive=True, symmetric=False, transitive=True) -> InternalRelation:
    """Close seed pairs under restriction, then under the requested frame properties."""
    p = x.base
    pairs = {c: set(seeds.get(c, ())) for c in p.objects}
    for c in p.objects:
        for a, b in list(pairs[c]):
            for d in p.below(c):
                pairs[d].add((x.restrict(a, c, d), x.restrict(b, c, d)))
    for c in p.objects:
        g = pairs[c]
        if reflexive:
            g |= {(a, a) for a in x.carrier(c)}
        if symmetric:
            g |= {(b, a) for a, b in g}
        if transitive:
            changed = True
            while changed:
                new = {(a, e) for a, b in g for b2, e in g if b == b2} - g
                changed = bool(new)
                g |= new
    return InternalRelation(x, pairs, name="R")


def random_relation(rng: random.Random, x: Presheaf, density: float = 0.3, symmetric=False) -> InternalRelation:
    """A random internal preorder (or equivalence when ``symmetric``)."""
    p = x.base
    seeds = {
        c: [(a, b) for a in x.carrier(c) for b in x.carrier(c) if a != b and rng.random() < density]
        for c in p.objects
    }
    return closed_relation(x, seeds, symmetric=symmetric)


def random_model(rng: random.Random, max_objects: int = 4, max_size: int = 3, symmetric=None) -> Model:
    """Poset, sort ``X``, preorder ``R`` on it, atoms ``p`` and ``q``."""
    p = random_poset(rng, max_objects)
    x = random_presheaf(rng, p, max_size)
    if symmetric is None:
        symmetric = rng.random() < 0.3
    r = random_relation(rng, x, symmetric=symmetric)
    m = Model(p, default_relation="R")
    m.add_sort("X", x)
    m.add_relation("R", "X", r)
    m.add_atom("p", "X", random_subobject(rng, x))
    m.add_atom("q", "X", random_subobject(rng, x))
    return m


# -- formulas ----------------------------------------------------------------

DEFAULT_ATOMS = {"p": "X", "q": "X"}


def random_formula(
    rng: random.Random,
    depth: int = 3,
    scope: dict | None = None,
    atoms: dict | None = None,
    sorts=("X",),
    relations: dict | None = None,
    fancy: bool = False,
):
    """A well-sorted formula whose free variables come from ``scope``.

    ``fancy`` mixes in relation qualifiers and bare modalities, which only
    matter for parse/print round trips.
    """
    atoms = atoms or DEFAULT_ATOMS
    relations = relations or {"R": "X"}
    scope = dict(scope or {})

    def var_of(sort):
        vs = [v for v, s in scope.items() if s == sort]
        return rng.choice(vs) if vs else None

    def leaf():
        choices = ["top", "bottom"]
        if any(s in scope.values() for s in atoms.values()):
            choices += ["atom"] * 4
        if scope:
            choices += ["eq", "E"]
        kind = rng.choice(choices)
        if kind == "top":
            return Top()
        if kind == "bottom":
            return Bottom()
        if kind == "atom":
            name = rng.choice([a for a, s in atoms.items() if s in scope.values()])
            return Atom(name, var_of(atoms[name]))
        v = rng.choice(sorted(scope))
        if kind == "E":
            return ExistsE(v)
        return Eq(v, var_of(scope[v]))

    def go(d):
        nonlocal scope
        if d <= 0:
            return leaf()
        kind = rng.choice(["leaf", "not", "and", "or", "implies", "box", "dia", "forall", "exists"])
        if kind == "leaf":
            return leaf()
        if kind == "not":
            return Not(go(d - 1))
        if kind in ("and", "or", "implies"):
            cls = {"and": And, "or": Or, "implies": Implies}[kind]
            return cls(go(d - 1), go(d - 1))
        if kind in ("box", "dia"):
            cls = Box if kind == "box" else Dia
            rel = rng.choice(sorted(relations))
            v = var_of(relations[rel])
            qual = rel if fancy and rng.random() < 0.3 else None
            if v is None:
                return cls(go(d - 1), rel if qual is None else qual, None)
            body = go(d - 1)
            if fancy and rng.random() < 0.3 and free_vars(body):
                return cls(body, qual, None)
            return cls(body, qual, v)
        sort = rng.choice(list(sorts))
        v = f"v{len(scope)}" if rng.random() < 0.8 or not scope else rng.choice(sorted(scope))
        saved = scope
        scope = {**scope, v: sort}
        body = go(d - 1)
        scope = saved
        return (Forall if kind == "forall" else Exists)(v, sort, body)

    return go(depth)
