"""Barcan-family and set-level reports built on the evaluator."""
from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import SortError, UnknownAtom, WrongBase
from .parser import parse
from .semantics import Evaluator, stage_table
from .syntax import Implies

E_INSTANCE_NOTE = (
    "with E(x) as the existence predicate the actualist schema is valid, because E(x) "
    "is forced everywhere; the failing instance uses an existence-like atom instead"
)

# key, label, template; {Q} is the relation qualifier, {S} the sort, {P} the atom
SCHEMAS = [
    ("1", "forall-box => box-forall", "(forall x:{S}. []{Q}{P}(x)) -> []{Q}(forall x:{S}. {P}(x))"),
    ("2", "exists-box => box-exists", "(exists x:{S}. []{Q}{P}(x)) -> []{Q}(exists x:{S}. {P}(x))"),
    ("3", "dia-forall => forall-dia", "<>{Q}(forall x:{S}. {P}(x)) -> (forall x:{S}. <>{Q}{P}(x))"),
    ("4", "dia-exists => exists-dia", "<>{Q}(exists x:{S}. {P}(x)) -> (exists x:{S}. <>{Q}{P}(x))"),
    ("1'", "box-forall => forall-box", "[]{Q}(forall x:{S}. {P}(x)) -> (forall x:{S}. []{Q}{P}(x))"),
    ("2'", "box-exists => exists-box", "[]{Q}(exists x:{S}. {P}(x)) -> (exists x:{S}. []{Q}{P}(x))"),
    ("3'", "forall-dia => dia-forall", "(forall x:{S}. <>{Q}{P}(x)) -> <>{Q}(forall x:{S}. {P}(x))"),
    ("4'", "exists-dia => dia-exists", "(exists x:{S}. <>{Q}{P}(x)) -> <>{Q}(exists x:{S}. {P}(x))"),
    ("forall-dia", "forall-dia => forall", "(forall x:{S}. <>{Q}{P}(x)) -> (forall x:{S}. {P}(x))"),
    ("exists-dia", "exists-dia => exists", "(exists x:{S}. <>{Q}{P}(x)) -> (exists x:{S}. {P}(x))"),
    ("actualist", "actualist schema", "forall x:{S}. <>{Q}{P}(x) -> {P}(x)"),
    ("actualist-E", "actualist schema with E", "forall x:{S}. <>{Q}E(x) -> E(x)"),
]


@dataclass
class SchemaVerdict:
    key: str
    label: str
    text: str
    valid: bool
    table: dict
    antecedent: dict
    consequent: dict
    failing_stages: list
    note: str | None = None

    def to_dict(self, p):
        return {
            "key": self.key,
            "label": self.label,
            "formula": self.text,
            "valid": self.valid,
            "failing_stages": self.failing_stages,
            "value": {c: s.sorted_members(p) for c, s in self.table.items()},
            "antecedent": {c: s.sorted_members(p) for c, s in self.antecedent.items()},
            "consequent": {c: s.sorted_members(p) for c, s in self.consequent.items()},
            "note": self.note,
        }


@dataclass
class BarcanReport:
    relation: str
    sort: str
    atom: str
    verdicts: list = field(default_factory=list)

    def __getitem__(self, key) -> SchemaVerdict:
        for v in self.verdicts:
            if v.key == key:
                return v
        raise KeyError(key)


def _split(f):
    if isinstance(f, Implies):
        return f.left, f.right
    return None


def default_atom(model, sort):
    if "phi" in model.atoms and model.atom_sorts["phi"] == sort:
        return "phi"
    for name in model.atoms:
        if model.atom_sorts[name] == sort:
            return name
    raise UnknownAtom(f"no atom declared on sort {sort!r}")


def barcan_report(model, relation: str | None = None, phi: str | None = None) -> BarcanReport:
    """Evaluate the Barcan schemas, their converses and the actualist schema."""
    relation = relation or model.default_relation
    if relation is None:
        if len(model.relations) != 1:
            raise SortError("name the relation to use")
        relation = next(iter(model.relations))
    model.relation(relation)
    sort = model.relation_sorts[relation]
    phi = phi or default_atom(model, sort)
    model.atom(phi)
    if model.atom_sorts[phi] != sort:
        raise SortError(f"atom {phi!r} has sort {model.atom_sorts[phi]!r}, relation is on {sort!r}")
    ev = Evaluator(model)
    p = model.poset
    report = BarcanReport(relation, sort, phi)
    for key, label, template in SCHEMAS:
        text = template.format(Q="{" + relation + "}", S=sort, P=phi)
        f = parse(text)
        table = stage_table(f, model, ev)
        pieces = _split(f)
        ante = stage_table(pieces[0], model, ev) if pieces else {}
        cons = stage_table(pieces[1], model, ev) if pieces else {}
        failing = [c for c in p.objects if not table[c].is_total(p)]
        report.verdicts.append(
            SchemaVerdict(
                key, label, text, not failing, table, ante, cons, failing,
                note=E_INSTANCE_NOTE if key == "actualist-E" else None,
            )
        )
    return report


@dataclass
class SetLevelReport:
    sort: str
    relation: str
    atom: str
    phi: list
    box_phi: list
    dia_phi: list
    exists_phi: bool
    exists_box_phi: bool
    box_exists_phi: bool
    exists_dia_phi: bool

    @property
    def de_dicto_to_de_re(self) -> bool:
        """Whether box-exists implies exists-box here."""
        return (not self.box_exists_phi) or self.exists_box_phi

    def to_dict(self):
        return {
            "sort": self.sort,
            "relation": self.relation,
            "atom": self.atom,
            "phi": self.phi,
            "box_phi": self.box_phi,
            "dia_phi": self.dia_phi,
            "exists_phi": self.exists_phi,
            "exists_box_phi": self.exists_box_phi,
            "box_exists_phi": self.box_exists_phi,
            "exists_dia_phi": self.exists_dia_phi,
            "de_dicto_to_de_re": self.de_dicto_to_de_re,
        }


def eval_set_level(model, sort: str | None = None, relation: str | None = None, phi: str | None = None) -> SetLevelReport:
    """The one-stage case, where forcing is ordinary truth and box is Alexandrov interior."""
    p = model.poset
    if len(p) != 1:
        raise WrongBase(f"set-level evaluation needs a one-object base, this one has {len(p)}")
    (c,) = p.objects
    relation = relation or model.default_relation or next(iter(sorted(model.relations)), None)
    if relation is None:
        raise SortError("the model declares no relation")
    sort = sort or model.relation_sorts[relation]
    phi = phi or default_atom(model, sort)
    ev = Evaluator(model)
    q = "{" + relation + "}"

    def truth(text):
        return bool(stage_table(parse(text), model, ev)[c].members)

    def members(text):
        interp = ev.value(parse(text), (("x", sort),))
        return sorted((t[0] for t in interp.members[c]), key=_order_key)

    return SetLevelReport(
        sort=sort,
        relation=relation,
        atom=phi,
        phi=members(f"{phi}(x)"),
        box_phi=members(f"[]{q}{phi}(x)"),
        dia_phi=members(f"<>{q}{phi}(x)"),
        exists_phi=truth(f"exists x:{sort}. {phi}(x)"),
        exists_box_phi=truth(f"exists x:{sort}. []{q}{phi}(x)"),
        box_exists_phi=truth(f"[]{q}(exists x:{sort}. {phi}(x))"),
        exists_dia_phi=truth(f"exists x:{sort}. <>{q}{phi}(x)"),
    )


def _order_key(a):
    return (0, a, "") if isinstance(a, (int, float)) else (1, 0, str(a))
