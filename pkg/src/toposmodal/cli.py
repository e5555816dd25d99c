"""``topos`` command-line workbench.

Exit codes: 0 success, 1 validation or resolution failure, 2 a law expected
from the relation's properties failed under ``--strict``, 3 file or parse
error.
"""
from __future__ import annotations

import argparse
import json
import sys

from .bst import build_model
from .errors import ParseError, ToposError
from .formula import barcan_report, eval_set_level, force, parse, stage_table
from .formula.syntax import free_vars, to_text
from .modal import ModalContext, check_is4, check_mao, check_relation, expected_laws
from .model import ModelFileError, load_model
from .order import Sieve, sieves_on
from .power import RelSub, power_elements
from .presheaf import subobject_violations, validate

OK, INVALID, STRICT_FAIL, IO_ERROR = 0, 1, 2, 3


class CommandError(Exception):
    def __init__(self, message, code=INVALID):
        super().__init__(message)
        self.code = code


# -- rendering helpers -------------------------------------------------------


def jsonable(v, p=None):
    if isinstance(v, Sieve):
        return p.sort(v.members) if p is not None else sorted(v.members)
    if isinstance(v, RelSub):
        return {d: sorted((jsonable(a) for a in v(d)), key=str) for d in v.of.base.below(v.at)}
    if isinstance(v, (tuple, list)):
        return [jsonable(a, p) for a in v]
    if isinstance(v, (set, frozenset)):
        return sorted((jsonable(a, p) for a in v), key=str)
    if isinstance(v, dict):
        return {str(k): jsonable(a, p) for k, a in v.items()}
    return v


def show(v) -> str:
    if isinstance(v, tuple):
        return "(" + ", ".join(show(a) for a in v) + ")"
    return str(v)


def show_sieve(s: Sieve, p) -> str:
    body = "{" + ", ".join(p.sort(s.members)) + "}"
    return "⊤ " + body if s.is_total(p) else body


def show_relsub(s: RelSub) -> str:
    parts = [f"{d}: {{{', '.join(sorted(show(a) for a in s(d)))}}}" for d in s.of.base.below(s.at)]
    return "[" + "; ".join(parts) + "]"


# -- commands ----------------------------------------------------------------


def _relation_name(m, name):
    if name:
        m.relation(name)
        return name
    if m.default_relation:
        return m.default_relation
    if len(m.relations) == 1:
        return next(iter(m.relations))
    raise CommandError(f"choose a relation with --relation (declared: {sorted(m.relations)})")


def cmd_check(args):
    m = load_model(args.model, check=False)
    p = m.poset
    problems = []
    out = {"command": "check", "model": args.model, "poset": {"objects": list(p.objects), "valid": True}}
    sorts = {}
    for name, x in m.sorts.items():
        rep = validate(x)
        sorts[name] = {"valid": rep.valid, "violations": [str(v) for v in rep.violations]}
        problems += [f"presheaf {name}: {v}" for v in rep.violations]
    out["presheaves"] = sorts
    subs = {}
    for name, s in m.atoms.items():
        vs = subobject_violations(s)
        subs[name] = {"sort": m.atom_sorts[name], "valid": not vs, "violations": vs}
        problems += [f"subobject {name}: {v}" for v in vs]
    out["subobjects"] = subs
    rels = {}
    for name, r in m.relations.items():
        rep = check_relation(r)
        rels[name] = {
            "sort": m.relation_sorts[name],
            "valid": not rep.subpresheaf_violations,
            "violations": rep.subpresheaf_violations,
            "reflexive": rep.reflexive,
            "symmetric": rep.symmetric,
            "transitive": rep.transitive,
            "preorder": rep.preorder,
            "equivalence": rep.equivalence,
        }
        problems += [f"relation {name}: {v}" for v in rep.subpresheaf_violations]
    out["relations"] = rels
    formulas = {}
    for name, text in m.formulas.items():
        try:
            parse(text, m.signature())
            formulas[name] = {"text": text, "valid": True}
        except ToposError as exc:
            formulas[name] = {"text": text, "valid": False, "error": str(exc)}
            problems.append(f"formula {name}: {exc}")
    out["formulas"] = formulas
    out["valid"] = not problems
    out["problems"] = problems

    lines = [f"model {args.model}: {'valid' if not problems else 'INVALID'}"]
    lines.append(f"poset: {len(p)} objects, {len(p.covers())} covers")
    for name, info in sorts.items():
        lines.append(f"presheaf {name}: {'ok' if info['valid'] else 'INVALID'}")
    for name, info in subs.items():
        lines.append(f"subobject {name} : {info['sort']}: {'ok' if info['valid'] else 'INVALID'}")
    for name, info in rels.items():
        flags = [k for k in ("reflexive", "symmetric", "transitive") if info[k]]
        kind = "equivalence" if info["equivalence"] else "preorder" if info["preorder"] else "relation"
        lines.append(
            f"relation {name} on {info['sort']}: {'ok' if info['valid'] else 'INVALID'}, "
            f"{kind} ({', '.join(flags) or 'no frame properties'})"
        )
    for name, info in formulas.items():
        lines.append(f"formula {name}: {'ok' if info['valid'] else 'INVALID: ' + info['error']}")
    lines += [f"  {msg}" for msg in problems]
    return out, lines, OK if not problems else INVALID


def cmd_histories(args):
    m = load_model(args.model)
    bst = m.bst or build_model(m.poset)
    w = bst.world
    rep = bst.relation_report
    undiv = {c: sorted(bst.undivided.graph.members[c]) for c in w.objects}
    out = {
        "command": "histories",
        "model": args.model,
        "histories": [{"id": h.id, "top": h.top, "events": w.sort(h.events)} for h in bst.histories],
        "H": {c: list(bst.h_presheaf.carrier(c)) for c in w.objects},
        "undivided": {c: [list(pr) for pr in v] for c, v in undiv.items()},
        "choice_points": [list(t) for t in bst.choice_points],
        "relation": {
            "reflexive": rep.reflexive,
            "symmetric": rep.symmetric,
            "transitive": rep.transitive,
            "transitivity_failures": [list(t) for t in rep.transitive_failures],
        },
        "mao_eligible": bst.mao_eligible,
        "caveats": list(bst.caveats),
    }
    lines = ["histories:"]
    lines += [f"  {h.id} = {{{', '.join(w.sort(h.events))}}}  (top {h.top})" for h in bst.histories]
    lines.append("H:")
    lines += [f"  H({c}) = {{{', '.join(bst.h_presheaf.carrier(c))}}}" for c in w.objects]
    lines.append("undivided:")
    for c in w.objects:
        lines.append(f"  {c}: " + (", ".join(f"{a}~{b}" for a, b in undiv[c]) or "(none)"))
    lines.append("choice points:")
    lines += [f"  {e} ({a}, {b})" for e, a, b in bst.choice_points] or ["  (none)"]
    lines.append(f"MAO-eligible: {'yes' if bst.mao_eligible else 'no'}")
    for c, a, b, e in rep.transitive_failures:
        lines.append(f"  transitivity fails at {c}: {a}~{b}, {b}~{e}, not {a}~{e}")
    lines += [f"warning: {msg}" for msg in bst.caveats]
    return out, lines, OK


def _law_rows(report):
    rows = []
    for name, v in report.laws.items():
        row = {"law": name, "holds": v.holds, "regime": v.regime, "checked": v.checked, "vacuous": v.vacuous}
        if v.witness is not None:
            w = v.witness
            row["witness"] = {
                "stage": w.stage,
                "s": jsonable(w.s),
                "u": None if w.u is None else jsonable(w.u),
                "element": jsonable(list(w.element)),
            }
        rows.append(row)
    return rows


def cmd_axioms(args):
    m = load_model(args.model)
    name = _relation_name(m, args.relation)
    r = m.relation(name)
    x = r.on
    ctx = ModalContext(x, r, mode=args.mode, oracle_limit=args.limit)
    rep = check_relation(r)
    is4 = check_is4(ctx, limit=args.limit, seed=args.seed)
    mao = check_mao(ctx, limit=args.limit, seed=args.seed)
    expected = expected_laws(rep)
    rows = _law_rows(is4) + _law_rows(mao)
    broken = sorted(row["law"] for row in rows if not row["holds"] and row["law"] in expected)
    out = {
        "command": "axioms",
        "model": args.model,
        "relation": name,
        "mode": args.mode,
        "seed": args.seed,
        "limit": args.limit,
        "flags": {"reflexive": rep.reflexive, "symmetric": rep.symmetric, "transitive": rep.transitive},
        "regime": "exhaustive" if is4.regime == mao.regime == "exhaustive" else "sampled",
        "laws": rows,
        "expected": sorted(expected),
        "expected_failures": broken,
    }
    lines = [
        f"relation {name} on {m.relation_sorts[name]} (mode {args.mode}, seed {args.seed})",
        "flags: " + ", ".join(f"{k}={'yes' if v else 'no'}" for k, v in out["flags"].items()),
    ]
    for row in rows:
        mark = "holds" if row["holds"] else "FAILS"
        tag = " (expected)" if row["law"] in expected else ""
        lines.append(f"  {row['law']:<27} {mark:<6} {row['regime']}, {row['checked']} checks{tag}")
    for v in is4.failures() + mao.failures():
        lines.append(f"  witness for {v.name}: {v.witness.describe()}")
    code = STRICT_FAIL if (args.strict and broken) else OK
    return out, lines, code


def _parse_env(text):
    env = {}
    if not text:
        return env
    for part in text.split(","):
        if "=" not in part:
            raise CommandError(f"bad --env entry {part!r}; expected var=element", IO_ERROR)
        k, v = part.split("=", 1)
        env[k.strip()] = v.strip()
    return env


def cmd_eval(args):
    m = load_model(args.model)
    p = m.poset
    text = m.formulas.get(args.formula, args.formula)
    f = parse(text, m.signature())
    out = {"command": "eval", "model": args.model, "formula": to_text(f)}
    if args.stage is not None or args.env:
        stage = args.stage
        if stage is None:
            raise CommandError("--env needs --stage")
        res = force(f, m, stage, _parse_env(args.env))
        out.update(
            stage=stage,
            bindings=jsonable(res.bindings),
            sieve=p.sort(res.sieve.members),
            total=res.verdict,
            verdict=res.verdict,
        )
        env = ", ".join(f"{k}={show(v)}" for k, v in res.bindings.items())
        lines = [
            f"{out['formula']}",
            f"stage {stage}" + (f", {env}" if env else "") + f": {'forced' if res.verdict else 'not forced'}",
            f"sieve: {show_sieve(res.sieve, p)}",
        ]
        return out, lines, OK
    if free_vars(f):
        raise CommandError(
            f"formula has free variables {', '.join(free_vars(f))}; give --stage and --env"
        )
    table = stage_table(f, m)
    out["table"] = {c: p.sort(s.members) for c, s in table.items()}
    out["total"] = {c: s.is_total(p) for c, s in table.items()}
    out["valid"] = all(out["total"].values())
    lines = [out["formula"]]
    lines += [f"  {c}: {show_sieve(s, p)}" for c, s in table.items()]
    lines.append("valid" if out["valid"] else "not valid")
    return out, lines, OK


def cmd_barcan(args):
    m = load_model(args.model)
    p = m.poset
    name = _relation_name(m, args.relation)
    rep = barcan_report(m, name, args.phi)
    out = {
        "command": "barcan",
        "model": args.model,
        "relation": rep.relation,
        "sort": rep.sort,
        "phi": rep.atom,
        "schemas": [v.to_dict(p) for v in rep.verdicts],
    }
    lines = [f"relation {rep.relation} on {rep.sort}, phi = {rep.atom}"]
    for v in rep.verdicts:
        lines.append(f"  {'(' + v.key + ')':<13}{v.label:<26}{'valid' if v.valid else 'INVALID':<9}{v.text}")
        if not v.valid:
            c = v.failing_stages[0]
            lines.append(f"      fails at {c}: value {show_sieve(v.table[c], p)}")
            if v.antecedent:
                lines.append(
                    "      antecedent: " + ", ".join(f"{d} {show_sieve(s, p)}" for d, s in v.antecedent.items())
                )
                lines.append(
                    "      consequent: " + ", ".join(f"{d} {show_sieve(s, p)}" for d, s in v.consequent.items())
                )
        if v.note:
            lines.append(f"      note: {v.note}")
    if len(p) == 1:
        sl = eval_set_level(m, relation=name, phi=rep.atom)
        out["set_level"] = jsonable(sl.to_dict())
        lines.append("set level:")
        for k, val in sl.to_dict().items():
            if k not in ("sort", "relation", "atom"):
                lines.append(f"  {k}: {val}")
    return out, lines, OK


def cmd_power(args):
    m = load_model(args.model)
    x = m.sort(args.sort)
    p = m.poset
    stages = [args.stage] if args.stage else list(p.objects)
    out = {"command": "power", "model": args.model, "sort": args.sort, "stages": {}}
    lines = [f"P{args.sort}"]
    for c in stages:
        p.check(c)
        elems = power_elements(x, c, args.limit)
        out["stages"][c] = {
            "count": len(elems),
            "truncated": elems.truncated,
            "elements": [jsonable(s) for s in elems],
        }
        more = f" (first {len(elems)}, truncated)" if elems.truncated else ""
        lines.append(f"  {c}: {len(elems)} elements{more}")
        lines += [f"    {show_relsub(s)}" for s in elems]
    return out, lines, OK


def cmd_omega(args):
    m = load_model(args.model)
    p = m.poset
    stages = [args.stage] if args.stage else list(p.objects)
    out = {"command": "omega", "model": args.model, "stages": {}}
    lines = ["Omega"]
    for c in stages:
        ss = sieves_on(p, c)
        out["stages"][c] = [p.sort(s.members) for s in ss]
        lines.append(f"  {c}: {len(ss)} sieves")
        lines += [f"    {show_sieve(s, p)}" for s in ss]
    return out, lines, OK


COMMANDS = {
    "check": cmd_check,
    "histories": cmd_histories,
    "axioms": cmd_axioms,
    "eval": cmd_eval,
    "barcan": cmd_barcan,
    "power": cmd_power,
    "omega": cmd_omega,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("model", help="path to a JSON model file")
    common.add_argument("--json", action="store_true", help="print the structured report")
    common.add_argument("--seed", type=int, default=0, help="seed for sampled regimes")
    common.add_argument("--limit", type=int, default=4096, help="enumeration budget per stage")

    ap = argparse.ArgumentParser(prog="topos", description="Presheaf topos modal logic workbench")
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("check", parents=[common], help="validate a model file")
    sub.add_parser("histories", parents=[common], help="histories, choice points, undividedness")
    ax = sub.add_parser("axioms", parents=[common], help="check IS4 and MAO laws")
    ax.add_argument("--relation")
    ax.add_argument("--mode", choices=["fast", "oracle"], default="fast")
    ax.add_argument("--strict", action="store_true", help="exit 2 when an expected law fails")
    ev = sub.add_parser("eval", parents=[common], help="evaluate a formula")
    ev.add_argument("--formula", required=True, help="formula text or the name of a stored formula")
    ev.add_argument("--stage")
    ev.add_argument("--env", help="bindings such as h=h2,x=a")
    bc = sub.add_parser("barcan", parents=[common], help="Barcan and actualist report")
    bc.add_argument("--relation")
    bc.add_argument("--phi")
    pw = sub.add_parser("power", parents=[common], help="list power object elements")
    pw.add_argument("--sort", required=True)
    pw.add_argument("--stage")
    om = sub.add_parser("omega", parents=[common], help="list truth values")
    om.add_argument("--stage")
    return ap


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    args = build_parser().parse_args(argv)
    try:
        out, lines, code = COMMANDS[args.command](args)
    except (ModelFileError, ParseError) as exc:
        print(f"error: {exc}", file=stderr)
        return IO_ERROR
    except CommandError as exc:
        print(f"error: {exc}", file=stderr)
        return exc.code
    except ToposError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=stderr)
        return INVALID
    if args.json:
        print(json.dumps(jsonable(out), indent=2, ensure_ascii=False), file=stdout)
    else:
        print("\n".join(lines), file=stdout)
    return code


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
