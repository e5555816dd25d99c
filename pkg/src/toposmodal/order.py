"""Finite posets, sieves with their Heyting structure, and Set-level
Alexandrov interior/closure.

A poset is stored as a full reflexive-transitive boolean matrix so ``leq``
is a constant-time lookup.  Object order is declaration order and every
enumeration in the package follows it.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import BaseMismatch, CycleError, NotBelow, UnknownObject


class FinPoset:
    """Finite partial order (or preorder when ``preorder=True``)."""

    def __init__(self, objects: Sequence[str], leq: Sequence[Sequence[bool]], preorder: bool = False):
        self.objects = tuple(objects)
        if len(set(self.objects)) != len(self.objects):
            raise ValueError("object names must be unique")
        self.index = {name: i for i, name in enumerate(self.objects)}
        self.matrix = tuple(tuple(bool(v) for v in row) for row in leq)
        self.preorder = preorder
        n = len(self.objects)
        if len(self.matrix) != n or any(len(row) != n for row in self.matrix):
            raise ValueError("leq matrix must be square over the objects")
        m = self.matrix
        for i in range(n):
            if not m[i][i]:
                raise ValueError(f"leq is not reflexive at {self.objects[i]}")
            for j in range(n):
                if not m[i][j]:
                    continue
                if not preorder and i != j and m[j][i]:
                    raise CycleError(f"{self.objects[i]} <= {self.objects[j]} <= {self.objects[i]}")
                for k in range(n):
                    if m[j][k] and not m[i][k]:
                        raise ValueError("leq is not transitive")
        self._covers = None
        self._down = {
            c: tuple(self.objects[i] for i in range(n) if m[i][self.index[c]]) for c in self.objects
        }
        self._up = {
            c: tuple(self.objects[j] for j in range(n) if m[self.index[c]][j]) for c in self.objects
        }

    @classmethod
    def from_covers(cls, objects: Sequence[str], covers: Iterable[tuple[str, str]], preorder: bool = False) -> "FinPoset":
        """Reflexive-transitive closure of the Hasse pairs ``(lower, upper)``."""
        objects = tuple(objects)
        index = {name: i for i, name in enumerate(objects)}
        n = len(objects)
        m = [[i == j for j in range(n)] for i in range(n)]
        for a, b in covers:
            for name in (a, b):
                if name not in index:
                    raise UnknownObject(f"unknown object {name!r}")
            m[index[a]][index[b]] = True
        # Warshall
        for k in range(n):
            for i in range(n):
                if m[i][k]:
                    row_k = m[k]
                    row_i = m[i]
                    for j in range(n):
                        if row_k[j]:
                            row_i[j] = True
        if not preorder:
            for i in range(n):
                for j in range(i + 1, n):
                    if m[i][j] and m[j][i]:
                        raise CycleError(
                            f"covers close to a cycle through {objects[i]!r} and {objects[j]!r}"
                        )
        return cls(objects, m, preorder=preorder)

    @classmethod
    def chain(cls, names: Sequence[str]) -> "FinPoset":
        names = list(names)
        return cls.from_covers(names, zip(names, names[1:]))

    @classmethod
    def discrete(cls, names: Sequence[str]) -> "FinPoset":
        return cls.from_covers(list(names), [])

    def __repr__(self):
        return f"FinPoset({list(self.objects)!r}, covers={self.covers()!r})"

    def __eq__(self, other):
        if not isinstance(other, FinPoset):
            return NotImplemented
        return self.objects == other.objects and self.matrix == other.matrix

    def __hash__(self):
        return hash((self.objects, self.matrix))

    def __len__(self):
        return len(self.objects)

    def __iter__(self):
        return iter(self.objects)

    def __contains__(self, c):
        return c in self.index

    def check(self, c: str) -> None:
        if c not in self.index:
            raise UnknownObject(f"unknown object {c!r}")

    def leq(self, a: str, b: str) -> bool:
        return self.matrix[self.index[a]][self.index[b]]

    def lt(self, a: str, b: str) -> bool:
        return a != b and self.leq(a, b)

    def below(self, c: str) -> tuple[str, ...]:
        """Principal downset of ``c`` in declaration order."""
        self.check(c)
        return self._down[c]

    def above(self, c: str) -> tuple[str, ...]:
        self.check(c)
        return self._up[c]

    def pairs(self) -> list[tuple[str, str]]:
        """All ``(d, c)`` with ``d <= c``."""
        return [(d, c) for c in self.objects for d in self._down[c]]

    def covers(self) -> list[tuple[str, str]]:
        if self._covers is not None:
            return list(self._covers)
        out = []
        for d, c in self.pairs():
            if d == c:
                continue
            if not any(self.lt(d, e) and self.lt(e, c) for e in self.objects):
                out.append((d, c))
        self._covers = tuple(out)
        return out

    def lower_covers(self, c: str) -> list[str]:
        return [d for d, top in self.covers() if top == c]

    def maximal(self) -> list[str]:
        return [c for c in self.objects if not any(self.lt(c, e) for e in self.objects)]

    def minimal(self) -> list[str]:
        return [c for c in self.objects if not any(self.lt(e, c) for e in self.objects)]

    def linear_extension(self, among: Iterable[str] | None = None) -> list[str]:
        """Lower objects first; ties broken by declaration order."""
        pool = list(self.objects if among is None else sorted(among, key=self.index.__getitem__))
        done: list[str] = []
        remaining = list(pool)
        while remaining:
            for c in remaining:
                if not any(self.lt(d, c) for d in remaining if d != c):
                    done.append(c)
                    remaining.remove(c)
                    break
            else:  # only reachable for genuine preorders with a cycle
                done.append(remaining.pop(0))
        return done

    def sort(self, names: Iterable[str]) -> list[str]:
        return sorted(names, key=self.index.__getitem__)


def principal_downset(p: FinPoset, c: str) -> frozenset:
    return frozenset(p.below(c))


@dataclass(frozen=True)
class Sieve:
    """A down-closed subset of the principal downset of ``base``."""

    base: str
    members: frozenset

    def __repr__(self):
        return f"Sieve({self.base!r}, {sorted(self.members)!r})"

    def __contains__(self, d):
        return d in self.members

    def __le__(self, other: "Sieve") -> bool:
        if self.base != other.base:
            raise BaseMismatch(f"sieves on {self.base!r} and {other.base!r}")
        return self.members <= other.members

    def is_total(self, p: FinPoset) -> bool:
        return self.members == frozenset(p.below(self.base))

    def sorted_members(self, p: FinPoset) -> list[str]:
        return p.sort(self.members)


def make_sieve(p: FinPoset, c: str, members: Iterable[str]) -> Sieve:
    """Build a sieve on ``c``, checking it is down-closed below ``c``."""
    p.check(c)
    members = frozenset(members)
    for d in members:
        p.check(d)
        if not p.leq(d, c):
            raise NotBelow(f"{d!r} is not below {c!r}")
        for e in p.below(d):
            if e not in members:
                raise ValueError(f"{sorted(members)} is not down-closed: missing {e!r}")
    return Sieve(c, members)


def total_sieve(p: FinPoset, c: str) -> Sieve:
    return Sieve(c, frozenset(p.below(c)))


def empty_sieve(p: FinPoset, c: str) -> Sieve:
    p.check(c)
    return Sieve(c, frozenset())


def _sieve_key(p: FinPoset, s: Sieve):
    return len(s.members), sorted(p.index[d] for d in s.members)


def sieves_on(p: FinPoset, c: str) -> list[Sieve]:
    """All sieves on ``c``, smallest first, then by member indices."""
    below = list(p.below(c))
    found = []
    # downsets of a small poset: grow by adding one element whose lower part is already in
    seen = {frozenset()}
    frontier = [frozenset()]
    while frontier:
        nxt = []
        for s in frontier:
            for d in below:
                if d in s:
                    continue
                if all(e in s for e in p.below(d) if e != d):
                    t = s | {d}
                    if t not in seen:
                        seen.add(t)
                        nxt.append(t)
        frontier = nxt
    found = [Sieve(c, s) for s in seen]
    found.sort(key=lambda s: _sieve_key(p, s))
    return found


def sieve_pullback(p: FinPoset, s: Sieve, d: str) -> Sieve:
    """Restrict a sieve on ``c`` along ``d <= c``."""
    p.check(d)
    if not p.leq(d, s.base):
        raise NotBelow(f"{d!r} is not below {s.base!r}")
    return Sieve(d, s.members & frozenset(p.below(d)))


def sieve_heyting(p: FinPoset, op: str, a: Sieve, b: Sieve | None = None) -> Sieve:
    """Heyting operations on the sieves of one stage.

    ``op`` is one of ``meet``, ``join``, ``implies``, ``neg``.
    """
    c = a.base
    if op == "neg":
        b = empty_sieve(p, c)
    if b is None:
        raise TypeError(f"{op} needs two operands")
    if b.base != c:
        raise BaseMismatch(f"sieves on {c!r} and {b.base!r}")
    if op == "meet":
        return Sieve(c, a.members & b.members)
    if op == "join":
        return Sieve(c, a.members | b.members)
    if op in ("implies", "neg"):
        out = frozenset(
            d for d in p.below(c)
            if all(e in b.members for e in p.below(d) if e in a.members)
        )
        return Sieve(c, out)
    raise ValueError(f"unknown Heyting operation {op!r}")


def alexandrov_interior(p: FinPoset, S: Iterable[str]) -> frozenset:
    """Points all of whose upper neighbours lie in ``S``."""
    S = frozenset(S)
    for x in S:
        p.check(x)
    return frozenset(s for s in p.objects if all(x in S for x in p.above(s)))


def alexandrov_closure(p: FinPoset, S: Iterable[str]) -> frozenset:
    """Points lying below some member of ``S``."""
    S = frozenset(S)
    for x in S:
        p.check(x)
    return frozenset(s for s in p.objects if any(x in S for x in p.above(s)))
