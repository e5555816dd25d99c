import random

import pytest

from toposmodal.errors import BudgetExceeded
from toposmodal.generate import random_model
from toposmodal.modal import (
    IS4_LAWS,
    LAWS,
    MAO_LAWS,
    ModalContext,
    check_is4,
    check_mao,
    check_relation,
    closure,
    closure_oracle,
    expected_laws,
    find_counterexample,
    interior,
    interior_oracle,
    interior_stage_local,
    oracle_agrees,
)
from toposmodal.order import FinPoset, alexandrov_closure, alexandrov_interior
from toposmodal.power import InternalRelation, RelSub, power_elements
from toposmodal.presheaf import Presheaf, terminal


@pytest.fixture
def hctx(w4):
    return ModalContext(w4.sort("H"), w4.relation("undivided"))


def h1_name(w4, c):
    return RelSub.of_subpresheaf(w4.atom("phi"), c)


def test_interior_of_h1_is_empty(w4, hctx):
    for c in w4.poset.objects:
        assert interior(hctx, h1_name(w4, c)).is_empty()


def test_closure_of_h1(w4, hctx):
    cl = closure(hctx, h1_name(w4, "e-1"))
    assert cl("e-1") == {"h1", "h2"}
    assert closure(hctx, h1_name(w4, "e0"))("e0") == {"h1"}
    assert closure(hctx, h1_name(w4, "e2"))("e2") == frozenset()


def test_stage_local_reading_differs(w4, hctx):
    # pointwise at e1 every successor of h1 is h1, yet the hereditary interior is empty
    local = interior_stage_local(hctx, h1_name(w4, "e1"))
    assert local["e1"] == {"h1"}
    assert interior(hctx, h1_name(w4, "e1"))("e1") == frozenset()


def test_oracle_matches_fast_on_w4(hctx):
    assert oracle_agrees(hctx) == (True, None)
    for c in hctx.x.base.objects:
        for s in power_elements(hctx.x, c):
            assert interior_oracle(hctx, s) == interior(hctx, s)
            assert closure_oracle(hctx, s) == closure(hctx, s)


def test_oracle_matches_fast_random():
    rng = random.Random(21)
    for _ in range(40):
        m = random_model(rng)
        ctx = ModalContext(m.sort("X"), m.relation("R"))
        ok, bad = oracle_agrees(ctx)
        assert ok, bad


def test_one_object_case_is_alexandrov():
    names = [str(i) for i in range(5)]
    chain = FinPoset.chain(names)
    star = FinPoset.from_covers(["*"], [])
    x = Presheaf(star, {"*": names})
    r = InternalRelation(x, {"*": [(a, b) for a in names for b in names if chain.leq(a, b)]})
    ctx = ModalContext(x, r)
    for s in power_elements(x, "*"):
        members = s("*")
        assert interior(ctx, s)("*") == alexandrov_interior(chain, members)
        assert closure(ctx, s)("*") == alexandrov_closure(chain, members)


def test_check_relation_flags(w4, fork, asym):
    assert check_relation(w4.relation("undivided")).equivalence
    rep = check_relation(fork.relation("undivided"))
    assert rep.reflexive and rep.symmetric and not rep.transitive
    assert ("e", "h1", "h2", "h3") in rep.transitive_failures
    assert check_relation(asym.relation("le")).preorder
    assert not check_relation(asym.relation("le")).symmetric


def test_check_relation_flags_non_closed_graph(w4):
    H = w4.sort("H")
    r = InternalRelation(H, {"e0": [("h1", "h2")]}, check=False)
    rep = check_relation(r)
    assert rep.subpresheaf_violations
    assert not rep.preorder


def test_all_laws_hold_on_w4(hctx):
    is4 = check_is4(hctx)
    mao = check_mao(hctx)
    assert is4.all_hold and mao.all_hold
    assert is4.regime == mao.regime == "exhaustive"
    assert set(is4.laws) == set(IS4_LAWS)
    assert set(mao.laws) == set(MAO_LAWS)


def test_oracle_mode_gives_same_verdicts(w4, asym):
    for m, rel in ((w4, "undivided"), (asym, "le")):
        x, r = m.relation(rel).on, m.relation(rel)
        fast = ModalContext(x, r)
        slow = ModalContext(x, r, mode="oracle")
        for check in (check_is4, check_mao):
            a, b = check(fast), check(slow)
            assert {k: v.holds for k, v in a.laws.items()} == {k: v.holds for k, v in b.laws.items()}


def test_asymmetric_unit_witness(asym):
    ctx = ModalContext(asym.sort("X"), asym.relation("le"))
    w = find_counterexample(ctx, "adjunction_unit")
    assert w.stage == "*"
    assert w.s("*") == {"x"}
    assert w.element == ("*", "x")
    assert check_mao(ctx)["adjunction_unit"].witness.s("*") == {"x"}
    assert find_counterexample(ctx, "interior_counit") is None


def test_counterexample_budget(asym):
    ctx = ModalContext(asym.sort("X"), asym.relation("le"))
    with pytest.raises(BudgetExceeded):
        find_counterexample(ctx, "interior_counit", budget=2)
    with pytest.raises(KeyError):
        find_counterexample(ctx, "no_such_law")


def test_fork_breaks_idempotence(fork):
    ctx = ModalContext(fork.sort("H"), fork.relation("undivided"))
    is4 = check_is4(ctx)
    assert not is4["interior_comultiplication"].holds
    assert is4["interior_counit"].holds and is4["closure_unit"].holds
    assert expected_laws(check_relation(fork.relation("undivided"))) == set()


def test_expected_laws():
    rep_eq = check_relation(InternalRelation.diagonal(terminal(FinPoset.chain(["a", "b"]))))
    assert expected_laws(rep_eq) == set(IS4_LAWS) | set(MAO_LAWS)


def test_sampled_regime_is_seeded(hctx):
    a = check_is4(hctx, limit=3, seed=7)
    b = check_is4(hctx, limit=3, seed=7)
    assert a.regime == "sampled"
    assert a.all_hold
    assert [(v.holds, v.checked, v.regime) for v in a.laws.values()] == [
        (v.holds, v.checked, v.regime) for v in b.laws.values()
    ]


def test_every_law_registered():
    assert set(IS4_LAWS) | set(MAO_LAWS) == set(LAWS)
