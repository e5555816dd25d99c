import random

from toposmodal.formula import check_formula, free_vars
from toposmodal.generate import random_formula, random_model
from toposmodal.modal import check_relation
from toposmodal.presheaf import subobject_violations, validate


def test_models_are_valid_and_seeded():
    for seed in range(50):
        m = random_model(random.Random(seed))
        assert validate(m.sort("X")).valid
        assert check_relation(m.relation("R")).preorder
        assert not subobject_violations(m.atom("p"))
        again = random_model(random.Random(seed))
        assert [again.sort("X").carrier(c) for c in m.poset.objects] == [m.sort("X").carrier(c) for c in m.poset.objects]
        assert again.relation("R").graph.members == m.relation("R").graph.members


def test_formulas_are_well_sorted():
    rng = random.Random(3)
    sig = random_model(random.Random(0)).signature()
    for _ in range(200):
        f = random_formula(rng, depth=4, scope={"a": "X"})
        assert set(free_vars(f)) <= {"a"}
        check_formula(f, sig, {"a": "X"})
