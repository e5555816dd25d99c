"""Finite presheaves over a :class:`FinPoset`, natural transformations,
subpresheaves, the subobject classifier and Kripke-Joyal forcing.

Conventions: a restriction map is keyed ``(c, d)`` for ``d <= c`` and sends
``X(c) -> X(d)``; ``x.restrict(a, c, d)`` is the element usually written
``a.d``.  Elements are arbitrary hashable labels; the same label may occur
at several stages.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product as cartesian
from typing import Any, Callable, Iterable, Mapping, Sequence

from .errors import (
    BaseMismatch,
    InvalidSubobject,
    NotNatural,
    PresheafError,
    UnknownElement,
    UnknownObject,
)
from .order import FinPoset, Sieve, sieves_on, sieve_pullback, total_sieve


@dataclass(frozen=True)
class Violation:
    kind: str  # identity | composition | totality | missing
    where: tuple
    detail: str

    def __str__(self):
        return f"{self.kind} at {'/'.join(map(str, self.where))}: {self.detail}"


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.valid


class Cells:
    """Bit positions for the pairs ``(d, a)`` with ``d <= c`` and ``a in X(d)``.

    Stages are laid out along a linear extension of the principal downset,
    so every restriction of a cell has a smaller bit than the cell itself.
    """

    def __init__(self, x: "Presheaf", c: str):
        p = x.base
        self.presheaf = x
        self.stage = c
        self.stages = tuple(p.linear_extension(p.below(c)))
        cells = []
        for d in self.stages:
            for a in x.carrier(d):
                cells.append((d, a))
        self.cells = tuple(cells)
        self.index = {cell: i for i, cell in enumerate(cells)}
        self.full = (1 << len(cells)) - 1
        self.stage_mask = {d: 0 for d in self.stages}
        for i, (d, _a) in enumerate(cells):
            self.stage_mask[d] |= 1 << i
        # orbit[i]: the cell together with all of its restrictions
        orbit = []
        for d, a in cells:
            m = 0
            for e in p.below(d):
                m |= 1 << self.index[(e, x.restrict(a, d, e))]
            orbit.append(m)
        self.orbit = tuple(orbit)

    def __len__(self):
        return len(self.cells)

    def bit(self, d, a) -> int:
        try:
            return 1 << self.index[(d, a)]
        except KeyError:
            raise UnknownElement(f"{a!r} is not an element of stage {d!r} below {self.stage!r}") from None

    def mask_of(self, members: Mapping[str, Iterable]) -> int:
        m = 0
        for d, elems in members.items():
            for a in elems:
                m |= self.bit(d, a)
        return m

    def members_of(self, mask: int) -> dict:
        out = {d: set() for d in self.stages}
        i = 0
        while mask:
            if mask & 1:
                d, a = self.cells[i]
                out[d].add(a)
            mask >>= 1
            i += 1
        return {d: frozenset(v) for d, v in out.items()}

    def iter_bits(self, mask: int):
        i = 0
        while mask:
            if mask & 1:
                yield i
            mask >>= 1
            i += 1

    def is_closed(self, mask: int) -> bool:
        for i in self.iter_bits(mask):
            if self.orbit[i] & ~mask:
                return False
        return True

    def closure(self, mask: int) -> int:
        out = 0
        for i in self.iter_bits(mask):
            out |= self.orbit[i]
        return out

    def closed_masks(self):
        """Yield restriction-closed masks in ascending numeric order."""
        orbit = self.orbit

        def walk(i, mask, required):
            if i < 0:
                yield mask
                return
            bit = 1 << i
            if not required & bit:
                yield from walk(i - 1, mask, required)
            yield from walk(i - 1, mask | bit, required | orbit[i])

        return walk(len(self.cells) - 1, 0, 0)


class Presheaf:
    """A functor from the opposite of a finite poset into finite sets."""

    def __init__(
        self,
        base: FinPoset,
        carriers: Mapping[str, Sequence],
        restrictions: Mapping[tuple, Mapping] | None = None,
        name: str | None = None,
        check: bool = True,
    ):
        self.base = base
        self.name = name
        self._carriers = {}
        for c in base.objects:
            elems = tuple(carriers.get(c, ()))
            if len(set(elems)) != len(elems):
                raise PresheafError(f"duplicate elements in carrier at {c!r}")
            self._carriers[c] = elems
        for c in carriers:
            if c not in base:
                raise UnknownObject(f"carrier given for unknown object {c!r}")
        self._sets = {c: frozenset(v) for c, v in self._carriers.items()}
        given = {}
        for (c, d), mapping in (restrictions or {}).items():
            for obj in (c, d):
                if obj not in base:
                    raise UnknownObject(f"restriction mentions unknown object {obj!r}")
            given[(c, d)] = dict(mapping)
        self._given = given
        self._problems: list[Violation] = []
        self.maps = {}
        for d, c in base.pairs():
            self.maps[(c, d)] = self._derive(c, d)
        self._cells = {}
        self._key = None
        if check:
            report = validate(self)
            if not report.valid:
                raise PresheafError(
                    f"invalid presheaf {name or ''}: {report.violations[0]}", report.violations
                )

    def _derive(self, c, d):
        if (c, d) in self.maps:
            return self.maps[(c, d)]
        if (c, d) in self._given:
            return self._given[(c, d)]
        if c == d:
            return {a: a for a in self._carriers[c]}
        if not self._carriers[c]:
            return {}
        p = self.base
        for e in p.lower_covers(c):
            if p.leq(d, e):
                if (c, e) not in self._given:
                    self._problems.append(Violation("missing", (c, e), "no restriction map given along a cover"))
                    return {}
                first = self._given[(c, e)]
                second = self._derive(e, d)
                return {a: second.get(first.get(a)) for a in self._carriers[c]}
        return {}

    def __repr__(self):
        sizes = ", ".join(f"{c}:{len(self._carriers[c])}" for c in self.base.objects)
        return f"Presheaf({self.name or '?'}; {sizes})"

    def _structure(self):
        if self._key is None:
            self._key = (
                self.base,
                tuple(self._carriers[c] for c in self.base.objects),
                tuple(tuple(sorted(self.maps[k].items(), key=repr)) for k in sorted(self.maps)),
            )
        return self._key

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Presheaf):
            return NotImplemented
        return self._structure() == other._structure()

    def __hash__(self):
        return hash(self._structure())

    def carrier(self, c: str) -> tuple:
        try:
            return self._carriers[c]
        except KeyError:
            raise UnknownObject(f"unknown object {c!r}") from None

    def has(self, c: str, a) -> bool:
        return a in self._sets[c]

    def restrict(self, a, c: str, d: str):
        """The element ``a.d`` for ``a`` in ``X(c)`` and ``d <= c``."""
        if c == d:
            return a
        try:
            return self.maps[(c, d)][a]
        except KeyError:
            if (c, d) not in self.maps:
                raise UnknownObject(f"{d!r} is not below {c!r}") from None
            raise UnknownElement(f"{a!r} has no restriction from {c!r} to {d!r}") from None

    def elements(self):
        """All ``(stage, element)`` pairs."""
        return [(c, a) for c in self.base.objects for a in self._carriers[c]]

    def cells(self, c: str) -> Cells:
        cells = self._cells.get(c)
        if cells is None:
            self.base.check(c)
            cells = self._cells[c] = Cells(self, c)
        return cells


def validate(x: Presheaf) -> ValidationReport:
    """Report every identity, totality and composition failure of ``x``."""
    report = ValidationReport(list(x._problems))
    p = x.base
    for (c, d), mapping in x._given.items():
        if not p.leq(d, c):
            report.violations.append(Violation("missing", (c, d), f"{d} is not below {c}"))
    for d, c in p.pairs():
        mapping = x.maps[(c, d)]
        for a in x.carrier(c):
            if a not in mapping or mapping[a] is None:
                report.violations.append(Violation("totality", (c, d, a), "element has no image"))
            elif mapping[a] not in x._sets[d]:
                report.violations.append(
                    Violation("totality", (c, d, a), f"image {mapping[a]!r} not in carrier at {d}")
                )
            elif c == d and mapping[a] != a:
                report.violations.append(Violation("identity", (c, a), f"maps to {mapping[a]!r}"))
    for d, e in p.pairs():
        for c in p.above(e):
            outer = x.maps[(c, d)]
            first, second = x.maps[(c, e)], x.maps[(e, d)]
            for a in x.carrier(c):
                via = second.get(first.get(a))
                if via is not None and outer.get(a) is not None and via != outer[a]:
                    report.violations.append(
                        Violation(
                            "composition",
                            (c, e, d, a),
                            f"{c}->{e}->{d} gives {via!r} but {c}->{d} gives {outer[a]!r}",
                        )
                    )
    return report


def terminal(p: FinPoset) -> Presheaf:
    maps = {(c, d): {"*": "*"} for d, c in p.pairs()}
    return Presheaf(p, {c: ("*",) for c in p.objects}, maps, name="1")


def empty_presheaf(p: FinPoset) -> Presheaf:
    return Presheaf(p, {}, {(c, d): {} for d, c in p.pairs()}, name="0")


def yoneda(p: FinPoset, c: str) -> Presheaf:
    """Representable presheaf; the unique element at ``d <= c`` is the arrow ``(d, c)``."""
    p.check(c)
    carriers = {d: ((d, c),) for d in p.below(c)}
    maps = {}
    for e, d in p.pairs():
        if p.leq(d, c):
            maps[(d, e)] = {(d, c): (e, c)}
    return Presheaf(p, carriers, maps, name=f"y({c})")


def product(*factors: Presheaf, base: FinPoset | None = None) -> Presheaf:
    """Cartesian product with tuple elements; ``product()`` needs ``base``."""
    if factors:
        base = factors[0].base
    if base is None:
        raise TypeError("empty product needs a base poset")
    for f in factors:
        if f.base != base:
            raise BaseMismatch("factors live over different posets")
    carriers = {c: tuple(cartesian(*(f.carrier(c) for f in factors))) for c in base.objects}
    maps = {}
    for d, c in base.pairs():
        fmaps = [f.maps[(c, d)] for f in factors]
        maps[(c, d)] = {t: tuple(m[a] for m, a in zip(fmaps, t)) for t in carriers[c]}
    name = " x ".join(f.name or "?" for f in factors) if factors else "1"
    return Presheaf(base, carriers, maps, name=name, check=False)


class NatTrans:
    """A natural transformation given by its components ``c -> {a: f_c(a)}``."""

    def __init__(self, source: Presheaf, target: Presheaf, components: Mapping[str, Mapping], check: bool = True):
        if source.base != target.base:
            raise BaseMismatch("source and target live over different posets")
        self.source = source
        self.target = target
        self.components = {c: dict(components.get(c, {})) for c in source.base.objects}
        if check:
            problems = naturality_violations(self)
            if problems:
                raise NotNatural(problems[0])

    def __call__(self, c: str, a):
        try:
            return self.components[c][a]
        except KeyError:
            raise UnknownElement(f"{a!r} not in the domain at {c!r}") from None

    def __eq__(self, other):
        if not isinstance(other, NatTrans):
            return NotImplemented
        return (
            self.source == other.source
            and self.target == other.target
            and self.components == other.components
        )

    def __repr__(self):
        return f"NatTrans({self.source!r} -> {self.target!r})"

    @classmethod
    def from_function(cls, source: Presheaf, target: Presheaf, fn: Callable[[str, Any], Any], check=True):
        comps = {c: {a: fn(c, a) for a in source.carrier(c)} for c in source.base.objects}
        return cls(source, target, comps, check=check)


def naturality_violations(f: NatTrans) -> list[str]:
    out = []
    x, y = f.source, f.target
    for c in x.base.objects:
        comp = f.components[c]
        for a in x.carrier(c):
            if a not in comp:
                out.append(f"component at {c!r} undefined on {a!r}")
            elif not y.has(c, comp[a]):
                out.append(f"component at {c!r} sends {a!r} outside the target")
    if out:
        return out
    for d, c in x.base.pairs():
        for a in x.carrier(c):
            lhs = y.restrict(f.components[c][a], c, d)
            rhs = f.components[d][x.restrict(a, c, d)]
            if lhs != rhs:
                out.append(f"naturality fails along {d}<={c} at {a!r}: {lhs!r} != {rhs!r}")
    return out


def identity(x: Presheaf) -> NatTrans:
    return NatTrans(x, x, {c: {a: a for a in x.carrier(c)} for c in x.base.objects}, check=False)


def to_terminal(x: Presheaf, one: Presheaf | None = None) -> NatTrans:
    one = one or terminal(x.base)
    return NatTrans.from_function(x, one, lambda c, a: one.carrier(c)[0], check=False)


def projection(prod: Presheaf, i: int, target: Presheaf) -> NatTrans:
    return NatTrans.from_function(prod, target, lambda c, t: t[i])


def pairing(f: NatTrans, g: NatTrans) -> NatTrans:
    if f.source != g.source:
        raise BaseMismatch("pairing needs a common source")
    target = product(f.target, g.target)
    return NatTrans.from_function(f.source, target, lambda c, a: (f(c, a), g(c, a)), check=False)


class SubPresheaf:
    """A restriction-closed choice of members inside each carrier."""

    def __init__(self, of: Presheaf, members: Mapping[str, Iterable], check: bool = True):
        self.of = of
        self.members = {c: frozenset(members.get(c, ())) for c in of.base.objects}
        for c in members:
            of.base.check(c)
        if check:
            problems = subobject_violations(self)
            if problems:
                raise InvalidSubobject(problems[0])

    @classmethod
    def full(cls, x: Presheaf) -> "SubPresheaf":
        return cls(x, {c: x.carrier(c) for c in x.base.objects}, check=False)

    @classmethod
    def empty(cls, x: Presheaf) -> "SubPresheaf":
        return cls(x, {}, check=False)

    @classmethod
    def where(cls, x: Presheaf, pred: Callable[[str, Any], bool], check=True) -> "SubPresheaf":
        return cls(x, {c: [a for a in x.carrier(c) if pred(c, a)] for c in x.base.objects}, check=check)

    def __call__(self, c: str) -> frozenset:
        return self.members[c]

    def __contains__(self, cell):
        c, a = cell
        return a in self.members[c]

    def __eq__(self, other):
        if not isinstance(other, SubPresheaf):
            return NotImplemented
        return self.members == other.members and self.of == other.of

    def __hash__(self):
        return hash(tuple(sorted((c, tuple(sorted(m, key=repr))) for c, m in self.members.items())))

    def __le__(self, other: "SubPresheaf") -> bool:
        _same_ambient(self, other)
        return all(self.members[c] <= other.members[c] for c in self.members)

    def __repr__(self):
        body = ", ".join(f"{c}:{sorted(self.members[c], key=repr)}" for c in self.of.base.objects)
        return f"SubPresheaf({body})"

    def as_presheaf(self) -> Presheaf:
        x = self.of
        maps = {
            (c, d): {a: x.restrict(a, c, d) for a in self.members[c]}
            for d, c in x.base.pairs()
        }
        return Presheaf(x.base, {c: [a for a in x.carrier(c) if a in self.members[c]] for c in x.base.objects}, maps, check=False)


def subobject_violations(s: SubPresheaf) -> list[str]:
    x = s.of
    out = []
    for c in x.base.objects:
        for a in s.members[c]:
            if not x.has(c, a):
                out.append(f"{a!r} is not an element of the carrier at {c!r}")
                continue
            for d in x.base.below(c):
                b = x.restrict(a, c, d)
                if b not in s.members[d]:
                    out.append(f"{a!r} at {c!r} restricts to {b!r} at {d!r}, which is missing")
    return out


def _same_ambient(a: SubPresheaf, b: SubPresheaf):
    if a.of is not b.of and a.of != b.of:
        raise BaseMismatch("subpresheaves of different presheaves")


@lru_cache(maxsize=64)
def omega(p: FinPoset) -> Presheaf:
    """The subobject classifier: sieves at each stage, pullback as restriction."""
    carriers = {c: tuple(sieves_on(p, c)) for c in p.objects}
    maps = {
        (c, d): {s: sieve_pullback(p, s, d) for s in carriers[c]}
        for d, c in p.pairs()
    }
    return Presheaf(p, carriers, maps, name="Omega", check=False)


def classify(s: SubPresheaf) -> NatTrans:
    """The characteristic map: ``a`` at ``c`` goes to the stages where it lands in ``s``."""
    x = s.of
    bad = subobject_violations(s)
    if bad:
        raise InvalidSubobject(bad[0])
    p = x.base
    comps = {}
    for c in p.objects:
        comps[c] = {
            a: Sieve(c, frozenset(d for d in p.below(c) if x.restrict(a, c, d) in s.members[d]))
            for a in x.carrier(c)
        }
    return NatTrans(x, omega(p), comps, check=False)


def subobject_of(chi: NatTrans) -> SubPresheaf:
    """Pull the total sieve back along ``chi``."""
    p = chi.source.base
    if chi.target != omega(p):
        raise NotNatural("classifying maps must land in Omega")
    problems = naturality_violations(chi)
    if problems:
        raise NotNatural(problems[0])
    x = chi.source
    return SubPresheaf(
        x,
        {c: [a for a in x.carrier(c) if chi(c, a).is_total(p)] for c in p.objects},
        check=False,
    )


def constant_truth(x: Presheaf, value: bool = True) -> NatTrans:
    p = x.base
    if value:
        return NatTrans.from_function(x, omega(p), lambda c, a: total_sieve(p, c), check=False)
    return NatTrans.from_function(x, omega(p), lambda c, a: Sieve(c, frozenset()), check=False)


def equality_predicate(x: Presheaf) -> NatTrans:
    """Identity predicate on ``x``: the stages where both sides restrict equally."""
    p = x.base
    xx = product(x, x)

    def value(c, pair):
        a, b = pair
        return Sieve(c, frozenset(d for d in p.below(c) if x.restrict(a, c, d) == x.restrict(b, c, d)))

    return NatTrans.from_function(xx, omega(p), value, check=False)


def diagonal(x: Presheaf) -> SubPresheaf:
    return SubPresheaf(product(x, x), {c: [(a, a) for a in x.carrier(c)] for c in x.base.objects}, check=False)


def kernel_relation(tau: NatTrans) -> SubPresheaf:
    """Pairs identified by ``tau``; always an internal equivalence relation."""
    x = tau.source
    xx = product(x, x)
    return SubPresheaf(
        xx,
        {c: [(a, b) for a, b in xx.carrier(c) if tau(c, a) == tau(c, b)] for c in x.base.objects},
        check=False,
    )


def heyting_sub(op: str, a: SubPresheaf, b: SubPresheaf | None = None) -> SubPresheaf:
    """Heyting algebra of subpresheaves: ``meet``, ``join``, ``implies``, ``neg``."""
    x = a.of
    if op == "neg":
        b = SubPresheaf.empty(x)
    if b is None:
        raise TypeError(f"{op} needs two operands")
    _same_ambient(a, b)
    p = x.base
    if op == "meet":
        return SubPresheaf(x, {c: a.members[c] & b.members[c] for c in p.objects}, check=False)
    if op == "join":
        return SubPresheaf(x, {c: a.members[c] | b.members[c] for c in p.objects}, check=False)
    if op in ("implies", "neg"):
        out = {}
        for c in p.objects:
            keep = []
            for elem in x.carrier(c):
                ok = True
                for d in p.below(c):
                    r = x.restrict(elem, c, d)
                    if r in a.members[d] and r not in b.members[d]:
                        ok = False
                        break
                if ok:
                    keep.append(elem)
            out[c] = keep
        return SubPresheaf(x, out, check=False)
    raise ValueError(f"unknown Heyting operation {op!r}")


def sieve_value(phi: NatTrans, c: str, a) -> Sieve:
    """``phi_c(a)``, the full truth value of ``phi`` at ``a``."""
    x = phi.source
    x.base.check(c)
    if not x.has(c, a):
        raise UnknownElement(f"{a!r} is not an element at {c!r}")
    return phi(c, a)


def forces(phi: NatTrans, c: str, a) -> bool:
    """Stage ``c`` forces ``phi(a)`` iff the truth value is the total sieve."""
    return sieve_value(phi, c, a).is_total(phi.source.base)
