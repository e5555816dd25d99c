import io
import json

import pytest

from toposmodal import cli
from toposmodal.model import fixture_path


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.run([str(a) for a in argv], stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def call_json(*argv):
    code, out, err = call(*argv, "--json")
    return code, json.loads(out) if out else None, err


W4 = fixture_path("w4.json")
FORK = fixture_path("fork.json")
ASYM = fixture_path("asym.json")
BROKEN = fixture_path("broken.json")
CHAIN6 = fixture_path("chain6.json")
CHAIN5 = fixture_path("chain5.json")


def test_check_valid_fixtures():
    for path in (W4, FORK, ASYM, CHAIN6, CHAIN5):
        code, doc, _ = call_json("check", path)
        assert code == 0 and doc["valid"], path


def test_check_broken_reports_violations():
    code, out, _ = call("check", BROKEN)
    assert code == 1
    assert "totality at c/a/w: image 'ghost' not in carrier at a" in out
    code, doc, _ = call_json("check", BROKEN)
    assert code == 1 and not doc["presheaves"]["X"]["valid"]


def test_other_commands_refuse_broken_model():
    code, out, err = call("histories", BROKEN)
    assert code == 1 and out == "" and "PresheafError" in err


def test_missing_file_and_bad_json(tmp_path):
    assert call("check", tmp_path / "none.json")[0] == 3
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _, err = call("omega", bad)
    assert code == 3 and "error" in err


def test_histories_w4():
    code, doc, _ = call_json("histories", W4)
    assert code == 0
    assert [(h["id"], h["events"]) for h in doc["histories"]] == [
        ("h1", ["e-1", "e0", "e1"]),
        ("h2", ["e-1", "e0", "e2"]),
    ]
    assert doc["choice_points"] == [["e0", "h1", "h2"]]
    assert doc["mao_eligible"]


def test_histories_fork_transitivity_failure():
    code, doc, _ = call_json("histories", FORK)
    assert code == 0
    assert [h["id"] for h in doc["histories"]] == ["h1", "h2", "h3"]
    assert not doc["relation"]["transitive"]
    assert ["e", "h1", "h2", "h3"] in doc["relation"]["transitivity_failures"]
    assert not doc["mao_eligible"]
    code, out, _ = call("histories", FORK)
    assert "MAO-eligible: no" in out


def test_axioms_w4_strict():
    code, doc, _ = call_json("axioms", W4, "--strict")
    assert code == 0
    assert doc["regime"] == "exhaustive"
    assert all(row["holds"] for row in doc["laws"])
    assert len(doc["laws"]) == 13


def test_axioms_asym_witness():
    code, doc, _ = call_json("axioms", ASYM, "--strict")
    assert code == 0
    rows = {row["law"]: row for row in doc["laws"]}
    assert not rows["adjunction_unit"]["holds"]
    assert rows["adjunction_unit"]["witness"] == {"stage": "*", "s": {"*": ["x"]}, "u": None, "element": ["*", "x"]}
    assert doc["expected_failures"] == []


def test_axioms_strict_exit_code(monkeypatch):
    # pretend the asymmetric preorder were an equivalence, so failing laws are expected
    monkeypatch.setattr(cli, "expected_laws", lambda rep: {"adjunction_unit", "frobenius"})
    code, doc, _ = call_json("axioms", ASYM, "--strict")
    assert code == 2
    assert doc["expected_failures"] == ["adjunction_unit", "frobenius"]
    assert call("axioms", ASYM)[0] == 0


def test_axioms_oracle_mode_agrees():
    fast = call_json("axioms", FORK)[1]
    oracle = call_json("axioms", FORK, "--mode", "oracle")[1]
    assert [(r["law"], r["holds"]) for r in fast["laws"]] == [(r["law"], r["holds"]) for r in oracle["laws"]]


def test_axioms_unknown_relation():
    code, _, err = call("axioms", W4, "--relation", "nope")
    assert code == 1 and "nope" in err


def test_eval_stored_formula_table():
    code, doc, _ = call_json("eval", W4, "--formula", "forall_dia_phi")
    assert code == 0
    assert doc["table"] == {"e-1": ["e-1"], "e0": ["e-1"], "e1": ["e-1"], "e2": ["e-1"]}
    assert doc["total"]["e-1"] and not doc["valid"]
    code, out, _ = call("eval", W4, "--formula", "forall_dia_phi")
    assert "  e-1: ⊤ {e-1}" in out.splitlines()


def test_eval_forcing():
    code, doc, _ = call_json("eval", W4, "--formula", "<>phi(h)", "--stage", "e-1", "--env", "h=h2")
    assert code == 0 and doc["verdict"] and doc["sieve"] == ["e-1"]
    code, doc, _ = call_json("eval", W4, "--formula", "phi(h)", "--stage", "e-1", "--env", "h=h2")
    assert code == 0 and not doc["verdict"] and doc["sieve"] == []


def test_eval_errors():
    assert call("eval", W4, "--formula", "phi(h) /\\")[0] == 3
    assert call("eval", W4, "--formula", "phi(h)")[0] == 1
    assert call("eval", W4, "--formula", "phi(h)", "--stage", "e1", "--env", "h=h2")[0] == 1
    assert call("eval", W4, "--formula", "phi(h)", "--stage", "e1", "--env", "h")[0] == 3
    assert call("eval", W4, "--formula", "psi(h)", "--stage", "e1", "--env", "h=h1")[0] == 1


def test_barcan_w4():
    code, doc, _ = call_json("barcan", W4)
    assert code == 0
    valid = {s["key"]: s["valid"] for s in doc["schemas"]}
    assert valid == {
        "1": True, "2": True, "3": True, "4": True,
        "1'": True, "2'": False, "3'": False, "4'": True,
        "forall-dia": False, "exists-dia": True, "actualist": False, "actualist-E": True,
    }
    assert "set_level" not in doc


def test_barcan_set_level_section():
    code, doc, _ = call_json("barcan", CHAIN6)
    assert code == 0
    sl = doc["set_level"]
    assert sl["phi"] == [0, 2, 4] and sl["box_phi"] == [] and not sl["exists_box_phi"]
    code, doc, _ = call_json("barcan", CHAIN5)
    assert doc["set_level"]["box_phi"] == [4] and doc["set_level"]["exists_box_phi"]


def test_power_and_omega():
    code, doc, _ = call_json("power", ASYM, "--sort", "X")
    assert code == 0 and doc["stages"]["*"]["count"] == 4
    code, doc, _ = call_json("power", W4, "--sort", "H", "--stage", "e-1", "--limit", "2")
    assert doc["stages"]["e-1"]["truncated"] and doc["stages"]["e-1"]["count"] == 2
    code, doc, _ = call_json("omega", W4, "--stage", "e0")
    assert doc["stages"]["e0"] == [[], ["e-1"], ["e-1", "e0"]]
    assert call("power", ASYM, "--sort", "Nope")[0] == 1


@pytest.mark.parametrize(
    "argv",
    [
        ("check", W4),
        ("histories", FORK),
        ("axioms", FORK),
        ("eval", W4, "--formula", "barcan"),
        ("barcan", W4),
        ("power", W4, "--sort", "H"),
        ("omega", FORK),
    ],
)
def test_json_is_deterministic(argv):
    first = call(*argv, "--json")
    second = call(*argv, "--json")
    assert first == second
    json.loads(first[1])
