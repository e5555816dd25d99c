"""Models: a base poset with named sorts, relations, atoms and formulas.

Model files are single JSON documents::

    {"poset": {"objects": [...], "covers": [[lo, hi], ...]},
     "presheaves": [{"name": "X", "carriers": {obj: [...]},
                     "restrictions": [{"from": c, "to": d, "map": {a: b}}]}],
     "relations": [{"name": "R", "sort": "X", "pairs": {obj: [[a, b], ...]}}],
     "subobjects": [{"name": "phi", "sort": "X", "members": {obj: [...]}}],
     "formulas": {"name": "source text"},
     "builtins": {"bst": true},
     "default_relation": "R"}

Only ``poset`` is required.  The terminal sort is always available as ``1``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .bst import BstModel, build_model
from .errors import ToposError, UnknownAtom, UnknownSort
from .order import FinPoset
from .power import InternalRelation
from .presheaf import Presheaf, SubPresheaf, terminal


class ModelFileError(ToposError):
    """The model file is unreadable or structurally malformed."""


@dataclass
class Model:
    poset: FinPoset
    sorts: dict = field(default_factory=dict)
    relations: dict = field(default_factory=dict)
    relation_sorts: dict = field(default_factory=dict)
    atoms: dict = field(default_factory=dict)
    atom_sorts: dict = field(default_factory=dict)
    formulas: dict = field(default_factory=dict)
    bst: BstModel | None = None
    default_relation: str | None = None

    def __post_init__(self):
        self.sorts.setdefault("1", terminal(self.poset))

    def sort(self, name: str) -> Presheaf:
        try:
            return self.sorts[name]
        except KeyError:
            raise UnknownSort(f"unknown sort {name!r}") from None

    def atom(self, name: str) -> SubPresheaf:
        try:
            return self.atoms[name]
        except KeyError:
            raise UnknownAtom(f"unknown atom {name!r}") from None

    def relation(self, name: str) -> InternalRelation:
        try:
            return self.relations[name]
        except KeyError:
            raise UnknownSort(f"unknown relation {name!r}") from None

    def add_sort(self, name, x: Presheaf):
        self.sorts[name] = x

    def add_relation(self, name, sort, r: InternalRelation):
        self.relations[name] = r
        self.relation_sorts[name] = sort

    def add_atom(self, name, sort, s: SubPresheaf):
        self.atoms[name] = s
        self.atom_sorts[name] = sort

    def signature(self) -> "Signature":
        return Signature(
            sorts=set(self.sorts),
            atoms=dict(self.atom_sorts),
            relations=dict(self.relation_sorts),
            default_relation=self.default_relation,
        )


@dataclass
class Signature:
    """What the sort checker needs to know about a model."""

    sorts: set
    atoms: dict
    relations: dict
    default_relation: str | None = None


def from_bst(w: FinPoset, **extra) -> Model:
    """Model with ``H`` and ``undivided`` derived from a world poset."""
    bst = build_model(w)
    m = Model(w, bst=bst, default_relation="undivided", **extra)
    m.add_sort("H", bst.h_presheaf)
    m.add_relation("undivided", "H", bst.undivided)
    return m


def _need(doc, key, kind, where):
    if key not in doc:
        raise ModelFileError(f"{where}: missing field {key!r}")
    val = doc[key]
    if not isinstance(val, kind):
        raise ModelFileError(f"{where}: field {key!r} has the wrong type")
    return val


def _element(x: Presheaf, c, a):
    """JSON turns tuples into lists; match elements by their JSON shape."""
    if x.has(c, a):
        return a
    if isinstance(a, list):
        t = tuple(a)
        if x.has(c, t):
            return t
    return a


def model_from_dict(doc: dict, check: bool = True) -> Model:
    """Build a model; structural problems raise ModelFileError, invalid data raises ToposError."""
    if not isinstance(doc, dict):
        raise ModelFileError("model file must be a JSON object")
    pdoc = _need(doc, "poset", dict, "model")
    objects = [str(o) for o in _need(pdoc, "objects", list, "poset")]
    covers = [tuple(map(str, pair)) for pair in pdoc.get("covers", [])]
    if any(len(pair) != 2 for pair in covers):
        raise ModelFileError("poset: covers must be pairs")
    p = FinPoset.from_covers(objects, covers)

    builtins = doc.get("builtins", {}) or {}
    if builtins.get("bst"):
        m = from_bst(p)
    else:
        m = Model(p)

    for i, pre in enumerate(doc.get("presheaves", [])):
        where = f"presheaves[{i}]"
        name = _need(pre, "name", str, where)
        carriers = {str(c): tuple(v) for c, v in _need(pre, "carriers", dict, where).items()}
        for c in p.objects:
            carriers.setdefault(c, ())
        maps = {}
        for j, r in enumerate(pre.get("restrictions", [])):
            src, dst = str(r.get("from")), str(r.get("to"))
            raw = r.get("map")
            if not isinstance(raw, dict):
                raise ModelFileError(f"{where}.restrictions[{j}]: map must be an object")
            keys = {str(a): a for a in carriers.get(src, ())}
            vals = {str(b): b for b in carriers.get(dst, ())}
            maps[(src, dst)] = {keys.get(str(k), k): vals.get(str(v), v) for k, v in raw.items()}
        m.add_sort(name, Presheaf(p, carriers, maps, name=name, check=check))

    for i, rel in enumerate(doc.get("relations", [])):
        where = f"relations[{i}]"
        name = _need(rel, "name", str, where)
        sort = _need(rel, "sort", str, where)
        x = m.sort(sort)
        pairs = {}
        for c, plist in _need(rel, "pairs", dict, where).items():
            pairs[str(c)] = [(_element(x, c, a), _element(x, c, b)) for a, b in plist]
        m.add_relation(name, sort, InternalRelation(x, pairs, name=name, check=check))

    for i, sub in enumerate(doc.get("subobjects", [])):
        where = f"subobjects[{i}]"
        name = _need(sub, "name", str, where)
        sort = _need(sub, "sort", str, where)
        x = m.sort(sort)
        members = {c: [] for c in p.objects}
        for c, vals in _need(sub, "members", dict, where).items():
            members[str(c)] = [_element(x, c, a) for a in vals]
        m.add_atom(name, sort, SubPresheaf(x, members, check=check))

    formulas = doc.get("formulas", {}) or {}
    if not isinstance(formulas, dict):
        raise ModelFileError("formulas must be an object of name -> text")
    m.formulas.update({str(k): str(v) for k, v in formulas.items()})
    if "default_relation" in doc:
        m.default_relation = doc["default_relation"]
        m.relation(m.default_relation)
    return m


def load_model(path, check: bool = True) -> Model:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ModelFileError(f"cannot read {path}: {exc.strerror or exc}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFileError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}") from None
    return model_from_dict(doc, check=check)


def fixture_path(name: str) -> Path:
    """Location of a shipped fixture such as ``w4.json``."""
    return Path(__file__).with_name("fixtures") / name


__all__ = [
    "Model",
    "ModelFileError",
    "Signature",
    "fixture_path",
    "from_bst",
    "load_model",
    "model_from_dict",
]
