import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from toposmodal.errors import BaseMismatch, CycleError, NotBelow, UnknownObject
from toposmodal.order import (
    FinPoset,
    Sieve,
    alexandrov_closure,
    alexandrov_interior,
    empty_sieve,
    make_sieve,
    principal_downset,
    sieve_heyting,
    sieve_pullback,
    sieves_on,
    total_sieve,
)


def test_from_covers_w4(w4_poset):
    p = w4_poset
    pairs = {(a, b) for a in p.objects for b in p.objects if p.leq(a, b)}
    assert len(pairs) == 9
    assert pairs - {(a, a) for a in p.objects} == {
        ("e-1", "e0"), ("e-1", "e1"), ("e-1", "e2"), ("e0", "e1"), ("e0", "e2"),
    }


def test_singleton_and_cycle():
    p = FinPoset.from_covers(["a"], [])
    assert p.pairs() == [("a", "a")]
    with pytest.raises(CycleError):
        FinPoset.from_covers(["a", "b"], [("a", "b"), ("b", "a")])
    with pytest.raises(UnknownObject):
        FinPoset.from_covers(["a"], [("a", "zz")])


def test_preorder_flag_allows_cycles():
    p = FinPoset.from_covers(["a", "b"], [("a", "b"), ("b", "a")], preorder=True)
    assert p.leq("a", "b") and p.leq("b", "a")


def test_principal_downset(w4_poset):
    assert principal_downset(w4_poset, "e2") == {"e-1", "e0", "e2"}
    assert principal_downset(w4_poset, "e-1") == {"e-1"}
    chain = FinPoset.chain(["0", "1", "2"])
    assert principal_downset(chain, "2") == {"0", "1", "2"}
    with pytest.raises(UnknownObject):
        principal_downset(w4_poset, "nope")


def test_sieves_on(w4_poset):
    ss = sieves_on(w4_poset, "e-1")
    assert [s.members for s in ss] == [frozenset(), frozenset({"e-1"})]
    got = [sorted(s.members, key=w4_poset.index.get) for s in sieves_on(w4_poset, "e2")]
    assert got == [[], ["e-1"], ["e-1", "e0"], ["e-1", "e0", "e2"]]
    single = FinPoset.from_covers(["a"], [])
    assert len(sieves_on(single, "a")) == 2


def test_sieves_on_matches_subset_enumeration(w4_poset):
    from itertools import combinations

    p = w4_poset
    for c in p.objects:
        below = p.below(c)
        brute = set()
        for k in range(len(below) + 1):
            for sub in combinations(below, k):
                if all(e in sub for d in sub for e in p.below(d)):
                    brute.add(frozenset(sub))
        assert {s.members for s in sieves_on(p, c)} == brute


def test_pullback(w4_poset):
    p = w4_poset
    s = Sieve("e2", frozenset({"e-1", "e0", "e2"}))
    assert sieve_pullback(p, s, "e0").members == {"e-1", "e0"}
    assert sieve_pullback(p, s, "e2") == s
    assert sieve_pullback(p, empty_sieve(p, "e2"), "e-1").members == frozenset()
    with pytest.raises(NotBelow):
        sieve_pullback(p, s, "e1")


def test_heyting(w4_poset):
    p = w4_poset
    a = Sieve("e2", frozenset({"e-1", "e0"}))
    b = Sieve("e2", frozenset({"e-1"}))
    assert sieve_heyting(p, "implies", a, b).members == {"e-1"}
    top = total_sieve(p, "e2")
    assert sieve_heyting(p, "implies", top, b) == b
    assert sieve_heyting(p, "meet", a, top) == a
    assert sieve_heyting(p, "neg", empty_sieve(p, "e2")) == top
    with pytest.raises(BaseMismatch):
        sieve_heyting(p, "meet", a, Sieve("e1", frozenset()))


def test_heyting_adjunction_exhaustive(w4_poset):
    # c /\ a <= b  iff  c <= (a -> b)
    p = w4_poset
    for base in p.objects:
        ss = sieves_on(p, base)
        for a in ss:
            for b in ss:
                imp = sieve_heyting(p, "implies", a, b)
                assert imp.members <= frozenset(p.below(base))
                for c in ss:
                    assert (sieve_heyting(p, "meet", c, a) <= b) == (c <= imp)


def test_make_sieve_rejects_non_downsets(w4_poset):
    with pytest.raises(ValueError):
        make_sieve(w4_poset, "e2", {"e0"})


def test_alexandrov_evens():
    chain = FinPoset.chain([str(i) for i in range(6)])
    evens = {"0", "2", "4"}
    assert alexandrov_interior(chain, evens) == frozenset()
    assert alexandrov_closure(chain, evens) == frozenset(str(i) for i in range(5))
    chain5 = FinPoset.chain([str(i) for i in range(5)])
    assert alexandrov_interior(chain5, evens) == {"4"}


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6), st.data())
def test_alexandrov_interior_is_largest_upset_inside(n, data):
    names = [str(i) for i in range(n)]
    covers = data.draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1))))
    p = FinPoset.from_covers(names, [(names[a], names[b]) for a, b in covers if a < b])
    S = set(data.draw(st.lists(st.sampled_from(names))))
    inner = alexandrov_interior(p, S)
    outer = alexandrov_closure(p, S)
    assert inner <= S <= outer
    assert alexandrov_interior(p, inner) == inner
    assert alexandrov_closure(p, outer) == outer
