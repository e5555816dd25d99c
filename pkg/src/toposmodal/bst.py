"""Branching space-time models over a finite world poset.

In a finite poset every directed set has a greatest element, so histories
(maximal directed subsets) are exactly the principal downsets of maximal
events.  ``brute_force_histories`` keeps the original definition around as
an oracle.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

from .errors import EmptyWorld
from .modal import RelationReport, check_relation
from .order import FinPoset
from .power import InternalRelation
from .presheaf import Presheaf

TRANSITIVITY_CAVEAT = (
    "obvious undividedness is only guaranteed transitive in worlds with density and "
    "infima of bounded chains; a finite world has neither, so transitivity was checked "
    "and failed"
)


@dataclass(frozen=True)
class History:
    id: str
    events: frozenset
    top: str

    def __contains__(self, e):
        return e in self.events


@dataclass
class BstModel:
    world: FinPoset
    histories: list
    h_presheaf: Presheaf
    undivided: InternalRelation
    relation_report: RelationReport
    choice_points: list
    mao_eligible: bool
    caveats: list = field(default_factory=list)

    def history(self, hid: str) -> History:
        for h in self.histories:
            if h.id == hid:
                return h
        raise KeyError(hid)


def histories(w: FinPoset) -> list[History]:
    """Histories named ``h1, h2, ...`` after their maximal events in declaration order."""
    if not len(w):
        raise EmptyWorld("the world has no events")
    return [
        History(f"h{i}", frozenset(w.below(m)), m) for i, m in enumerate(w.maximal(), start=1)
    ]


def is_directed(w: FinPoset, events) -> bool:
    events = list(events)
    if not events:
        return False
    return all(any(w.leq(a, z) and w.leq(b, z) for z in events) for a in events for b in events)


def brute_force_histories(w: FinPoset) -> set[frozenset]:
    """Maximal directed subsets found by enumerating every subset."""
    objs = w.objects
    directed = [
        frozenset(sub)
        for k in range(1, len(objs) + 1)
        for sub in combinations(objs, k)
        if is_directed(w, sub)
    ]
    return {d for d in directed if not any(d < e for e in directed)}


def histories_presheaf(w: FinPoset, hs: list[History] | None = None) -> Presheaf:
    """``e`` goes to the histories containing it; restriction is inclusion."""
    hs = histories(w) if hs is None else hs
    carriers = {e: tuple(h.id for h in hs if e in h) for e in w.objects}
    maps = {(c, d): {h: h for h in carriers[c]} for d, c in w.pairs()}
    return Presheaf(w, carriers, maps, name="H")


def undivided(w: FinPoset, hs: list[History] | None = None, h: Presheaf | None = None) -> InternalRelation:
    """Obvious undividedness: a shared strictly later event, or ``e`` maximal."""
    hs = histories(w) if hs is None else hs
    h = histories_presheaf(w, hs) if h is None else h
    maximal = set(w.maximal())
    pairs = {}
    for e in w.objects:
        here = [x for x in hs if e in x]
        later = [f for f in w.above(e) if f != e]
        pairs[e] = [
            (a.id, b.id)
            for a in here
            for b in here
            if e in maximal or any(f in a and f in b for f in later)
        ]
    return InternalRelation(h, pairs, name="undivided")


def choice_points(w: FinPoset, hs: list[History] | None = None) -> list[tuple[str, str, str]]:
    """Triples ``(e, h, h')`` with ``e`` maximal in the intersection of ``h`` and ``h'``."""
    hs = histories(w) if hs is None else hs
    out = []
    for a, b in combinations(hs, 2):
        common = a.events & b.events
        for e in w.sort(common):
            if not any(w.lt(e, f) for f in common):
                out.append((e, a.id, b.id))
    out.sort(key=lambda t: (w.index[t[0]], t[1], t[2]))
    return out


def build_model(w: FinPoset) -> BstModel:
    hs = histories(w)
    h = histories_presheaf(w, hs)
    rel = undivided(w, hs, h)
    report = check_relation(rel)
    caveats = []
    if not report.transitive:
        caveats.append(TRANSITIVITY_CAVEAT)
    return BstModel(
        world=w,
        histories=hs,
        h_presheaf=h,
        undivided=rel,
        relation_report=report,
        choice_points=choice_points(w, hs),
        mao_eligible=report.equivalence,
        caveats=caveats,
    )
