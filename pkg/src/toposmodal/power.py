"""Power objects over a finite poset.

An element of ``PX`` at stage ``c`` is a :class:`RelSub`: a family of
subsets ``s(d)`` of ``X(d)`` for ``d <= c``, closed under restriction.  It is
stored as a bitmask over ``x.cells(c)`` so that meets, joins and inclusions
are integer operations.
"""
from __future__ import annotations

from itertools import islice
from typing import Iterable, Mapping

from .errors import BaseMismatch, BudgetExceeded, InvalidSubobject, StageMismatch
from .order import FinPoset, Sieve
from .presheaf import NatTrans, Presheaf, SubPresheaf, product


class RelSub:
    __slots__ = ("of", "at", "mask", "_hash")

    def __init__(self, of: Presheaf, at: str, mask: int):
        self.of = of
        self.at = at
        self.mask = mask
        self._hash = None

    @classmethod
    def from_members(cls, x: Presheaf, c: str, members: Mapping[str, Iterable], check: bool = True) -> "RelSub":
        cells = x.cells(c)
        for d in members:
            if d not in cells.stage_mask:
                raise StageMismatch(f"{d!r} is not below {c!r}")
        mask = cells.mask_of(members)
        if check and not cells.is_closed(mask):
            raise InvalidSubobject(f"family at {c!r} is not closed under restriction")
        return cls(x, c, mask)

    @classmethod
    def full(cls, x: Presheaf, c: str) -> "RelSub":
        return cls(x, c, x.cells(c).full)

    @classmethod
    def empty(cls, x: Presheaf, c: str) -> "RelSub":
        x.base.check(c)
        return cls(x, c, 0)

    @classmethod
    def of_subpresheaf(cls, s: SubPresheaf, c: str) -> "RelSub":
        """The part of a subpresheaf lying over ``c``."""
        return cls.from_members(s.of, c, {d: s.members[d] for d in s.of.base.below(c)}, check=False)

    @property
    def cells(self):
        return self.of.cells(self.at)

    @property
    def members(self) -> dict:
        return self.cells.members_of(self.mask)

    def __call__(self, d: str) -> frozenset:
        cells = self.cells
        if d not in cells.stage_mask:
            raise StageMismatch(f"{d!r} is not below {self.at!r}")
        return cells.members_of(self.mask & cells.stage_mask[d]).get(d, frozenset())

    def __contains__(self, cell) -> bool:
        d, a = cell
        idx = self.cells.index.get((d, a))
        return idx is not None and bool(self.mask >> idx & 1)

    def __eq__(self, other):
        if not isinstance(other, RelSub):
            return NotImplemented
        return self.at == other.at and self.mask == other.mask and (self.of is other.of or self.of == other.of)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.at, self.mask, len(self.cells)))
        return self._hash

    def __le__(self, other: "RelSub") -> bool:
        return px_leq(self, other)

    def __and__(self, other: "RelSub") -> "RelSub":
        _same_stage(self, other)
        return RelSub(self.of, self.at, self.mask & other.mask)

    def __or__(self, other: "RelSub") -> "RelSub":
        _same_stage(self, other)
        return RelSub(self.of, self.at, self.mask | other.mask)

    def __repr__(self):
        body = ", ".join(
            f"{d}:{sorted(v, key=repr)}" for d, v in self.members.items()
        )
        return f"RelSub@{self.at}({body})"

    def restrict(self, d: str) -> "RelSub":
        """The element of ``PX(d)`` obtained along ``d <= at``."""
        if d == self.at:
            return self
        p = self.of.base
        if not p.leq(d, self.at):
            raise StageMismatch(f"{d!r} is not below {self.at!r}")
        src, dst = self.cells, self.of.cells(d)
        mask = 0
        for i in src.iter_bits(self.mask):
            cell = src.cells[i]
            j = dst.index.get(cell)
            if j is not None:
                mask |= 1 << j
        return RelSub(self.of, d, mask)

    def is_empty(self) -> bool:
        return self.mask == 0


def _same_stage(s: RelSub, t: RelSub):
    if s.at != t.at:
        raise StageMismatch(f"stages {s.at!r} and {t.at!r} differ")
    if s.of is not t.of and s.of != t.of:
        raise BaseMismatch("power-object elements over different presheaves")


class Enumeration(list):
    """A list of enumerated elements that remembers whether it was cut short."""

    truncated = False


def power_elements(x: Presheaf, c: str, limit: int | None = None) -> Enumeration:
    """All elements of ``PX(c)`` in ascending mask order, at most ``limit``."""
    x.base.check(c)
    cells = x.cells(c)
    gen = cells.closed_masks()
    if limit is None:
        out = Enumeration(RelSub(x, c, m) for m in gen)
        return out
    out = Enumeration(RelSub(x, c, m) for m in islice(gen, limit))
    out.truncated = next(gen, None) is not None
    return out


def count_power_elements(x: Presheaf, c: str) -> int:
    return sum(1 for _ in x.cells(c).closed_masks())


def power_presheaf(x: Presheaf, limit: int | None = None) -> Presheaf:
    """``PX`` as a presheaf; raises :class:`BudgetExceeded` past ``limit`` per stage."""
    p = x.base
    carriers = {}
    for c in p.objects:
        elems = power_elements(x, c, limit)
        if elems.truncated:
            raise BudgetExceeded(f"PX({c}) has more than {limit} elements")
        carriers[c] = tuple(elems)
    maps = {(c, d): {s: s.restrict(d) for s in carriers[c]} for d, c in p.pairs()}
    return Presheaf(p, carriers, maps, name=f"P({x.name or '?'})", check=False)


def membership(x: Presheaf, a, s: RelSub) -> Sieve:
    """Truth value of ``a in s``: the stages where ``a`` restricts into ``s``."""
    c = s.at
    if not x.has(c, a):
        raise StageMismatch(f"{a!r} is not an element at stage {c!r}")
    p = x.base
    return Sieve(c, frozenset(d for d in p.below(c) if (d, x.restrict(a, c, d)) in s))


def name_of(phi) -> dict:
    """Transpose of a predicate ``X -> Omega`` (or of a subpresheaf) as a global
    family of ``PX`` elements, one per stage."""
    from .presheaf import subobject_of

    sub = phi if isinstance(phi, SubPresheaf) else subobject_of(phi)
    return {c: RelSub.of_subpresheaf(sub, c) for c in sub.of.base.objects}


def px_leq(s: RelSub, t: RelSub) -> bool:
    _same_stage(s, t)
    return s.mask & ~t.mask == 0


class InternalRelation:
    """A relation ``R >-> X x X`` given stage by stage; ``(a, b)`` reads ``a <= b``."""

    def __init__(self, on: Presheaf, pairs: Mapping[str, Iterable] | SubPresheaf, name: str | None = None, check: bool = True):
        self.on = on
        self.name = name
        xx = product(on, on)
        if isinstance(pairs, SubPresheaf):
            members = pairs.members
        else:
            members = {c: frozenset(tuple(pr) for pr in pairs.get(c, ())) for c in on.base.objects}
        self.graph = SubPresheaf(xx, members, check=check)
        self._flags = None

    def related(self, d: str, a, b) -> bool:
        return (a, b) in self.graph.members[d]

    def successors(self, d: str, a) -> list:
        g = self.graph.members[d]
        return [b for b in self.on.carrier(d) if (a, b) in g]

    def predecessors(self, d: str, b) -> list:
        g = self.graph.members[d]
        return [a for a in self.on.carrier(d) if (a, b) in g]

    @property
    def flags(self) -> dict:
        """Per-stage ``reflexive``/``transitive``/``symmetric`` booleans."""
        if self._flags is None:
            out = {}
            for c in self.on.base.objects:
                g = self.graph.members[c]
                elems = self.on.carrier(c)
                out[c] = {
                    "reflexive": all((a, a) in g for a in elems),
                    "symmetric": all((b, a) in g for a, b in g),
                    "transitive": all((a, d) in g for a, b in g for b2, d in g if b2 == b),
                }
            self._flags = out
        return self._flags

    def is_preorder(self) -> bool:
        return all(f["reflexive"] and f["transitive"] for f in self.flags.values())

    def is_equivalence(self) -> bool:
        return all(all(f.values()) for f in self.flags.values())

    def is_symmetric(self) -> bool:
        return all(f["symmetric"] for f in self.flags.values())

    def __repr__(self):
        return f"InternalRelation({self.name or '?'} on {self.on.name or '?'})"

    @classmethod
    def diagonal(cls, x: Presheaf, name="="):
        return cls(x, {c: [(a, a) for a in x.carrier(c)] for c in x.base.objects}, name=name, check=False)

    @classmethod
    def total(cls, x: Presheaf, name="total"):
        return cls(x, {c: [(a, b) for a in x.carrier(c) for b in x.carrier(c)] for c in x.base.objects}, name=name, check=False)


class InclusionOrder(InternalRelation):
    """The internal order of a power presheaf, ``(t, s)`` when ``t <= s``.

    Pairs are tested on demand; the graph is never materialized because
    ``PX x PX`` is quadratically large.
    """

    def __init__(self, px: Presheaf):
        self.on = px
        self.name = "<="
        self._flags = None

    @property
    def graph(self):
        raise NotImplementedError("the inclusion order is not materialized")

    def related(self, d, a, b):
        return a.mask & ~b.mask == 0

    def successors(self, d, a):
        return [b for b in self.on.carrier(d) if a.mask & ~b.mask == 0]

    def predecessors(self, d, b):
        return [a for a in self.on.carrier(d) if a.mask & ~b.mask == 0]


def downarrow(r: InternalRelation, b, c: str) -> RelSub:
    """Lower segment of ``b`` in ``X(c)``: ``a`` at ``d`` with ``a <= b.d``."""
    x = r.on
    if not x.has(c, b):
        raise StageMismatch(f"{b!r} is not an element at stage {c!r}")
    cells = x.cells(c)
    mask = 0
    for d in cells.stages:
        bd = x.restrict(b, c, d)
        for a in r.predecessors(d, bd):
            mask |= 1 << cells.index[(d, a)]
    return RelSub(x, c, mask)


def uparrow(r: InternalRelation, b, c: str) -> RelSub:
    """Upper segment of ``b`` in ``X(c)``: ``a`` at ``d`` with ``b.d <= a``."""
    x = r.on
    if not x.has(c, b):
        raise StageMismatch(f"{b!r} is not an element at stage {c!r}")
    cells = x.cells(c)
    mask = 0
    for d in cells.stages:
        bd = x.restrict(b, c, d)
        for a in r.successors(d, bd):
            mask |= 1 << cells.index[(d, a)]
    return RelSub(x, c, mask)


def segment_map(r: InternalRelation, px: Presheaf, direction: str = "down") -> NatTrans:
    """``X -> PX`` sending each element to its lower (or upper) segment."""
    seg = downarrow if direction == "down" else uparrow
    return NatTrans.from_function(r.on, px, lambda c, b: seg(r, b, c), check=False)


def inverse_image(f: NatTrans, t: RelSub) -> RelSub:
    """Elements of the source whose image lies in ``t``."""
    if t.of is not f.target and t.of != f.target:
        raise BaseMismatch("RelSub does not live over the target of the map")
    x = f.source
    c = t.at
    cells = x.cells(c)
    mask = 0
    for i, (d, a) in enumerate(cells.cells):
        if (d, f(d, a)) in t:
            mask |= 1 << i
    return RelSub(x, c, mask)


def direct_image(f: NatTrans, s: RelSub) -> RelSub:
    """Pointwise image of ``s`` along ``f``."""
    if s.of is not f.source and s.of != f.source:
        raise BaseMismatch("RelSub does not live over the source of the map")
    y = f.target
    c = s.at
    src = s.cells
    dst = y.cells(c)
    mask = 0
    for i in src.iter_bits(s.mask):
        d, a = src.cells[i]
        mask |= 1 << dst.index[(d, f(d, a))]
    return RelSub(y, c, mask)


def join(family: RelSub, x: Presheaf) -> RelSub:
    """Union of a family: ``family`` is an element of ``P(PX)`` at some stage."""
    c = family.at
    cells = x.cells(c)
    mask = 0
    fam_cells = family.cells
    for i in fam_cells.iter_bits(family.mask):
        d, y = fam_cells.cells[i]
        if not isinstance(y, RelSub) or y.at != d:
            raise StageMismatch("family members must be PX elements at their own stage")
        top = y.cells.stage_mask[d]
        for j in y.cells.iter_bits(y.mask & top):
            _, a = y.cells.cells[j]
            mask |= 1 << cells.index[(d, a)]
    return RelSub(x, c, mask)


def _forall(sub: SubPresheaf, rest: Presheaf, drop) -> SubPresheaf:
    prod = sub.of
    p = prod.base
    have, total = {}, {}
    for d in p.objects:
        h = have[d] = {}
        for t in sub.members[d]:
            g = drop(t)
            h[g] = h.get(g, 0) + 1
        n = total[d] = {}
        for t in prod.carrier(d):
            g = drop(t)
            n[g] = n.get(g, 0) + 1
    out = {}
    for c in p.objects:
        keep = []
        for g in rest.carrier(c):
            if all(
                have[d].get(gd, 0) == total[d].get(gd, 0)
                for d in p.below(c)
                for gd in (rest.restrict(g, c, d),)
            ):
                keep.append(g)
        out[c] = keep
    return SubPresheaf(rest, out, check=False)


def _exists(sub: SubPresheaf, rest: Presheaf, drop) -> SubPresheaf:
    out = {}
    for c in rest.base.objects:
        hit = {drop(t) for t in sub.members[c]}
        out[c] = [g for g in rest.carrier(c) if g in hit]
    return SubPresheaf(rest, out, check=False)


def forall_coordinate(sub: SubPresheaf, i: int, rest: Presheaf) -> SubPresheaf:
    """Universal quantification dropping coordinate ``i`` of a tuple-valued product.

    ``rest`` is the product of the remaining factors.  A tuple survives at
    ``c`` when every extension at every stage below ``c`` lies in ``sub``.
    """
    return _forall(sub, rest, lambda t: t[:i] + t[i + 1:])


def exists_coordinate(sub: SubPresheaf, i: int, rest: Presheaf) -> SubPresheaf:
    """Existential quantification dropping coordinate ``i``; witnesses are stage-local."""
    return _exists(sub, rest, lambda t: t[:i] + t[i + 1:])


def _check_context(gamma, y, phi):
    if gamma.base != y.base:
        raise BaseMismatch("context and quantified sort over different posets")
    expected = product(gamma, y)
    if phi.of is not expected and phi.of != expected:
        raise BaseMismatch("predicate does not live over gamma x Y")


def internal_forall(gamma: Presheaf, y: Presheaf, phi: SubPresheaf) -> SubPresheaf:
    """``forall b:Y. phi(g, b)`` as a subpresheaf of ``gamma``."""
    _check_context(gamma, y, phi)
    return _forall(phi, gamma, lambda t: t[0])


def internal_exists(gamma: Presheaf, y: Presheaf, phi: SubPresheaf) -> SubPresheaf:
    """``exists b:Y. phi(g, b)`` as a subpresheaf of ``gamma``."""
    _check_context(gamma, y, phi)
    return _exists(phi, gamma, lambda t: t[0])
