"""Modal logic in presheaf toposes over finite posets.

Layers, bottom up: finite orders and sieves, presheaves and their
subobject classifier, power objects, interior/closure operators induced by
internal preorders, branching space-time worlds, and a first-order modal
formula language with Kripke-Joyal forcing.
"""
from .bst import BstModel, History, build_model, choice_points, histories, histories_presheaf, undivided
from .errors import *  # noqa: F401,F403
from .modal import (
    LawReport,
    ModalContext,
    check_is4,
    check_mao,
    check_relation,
    closure,
    closure_oracle,
    find_counterexample,
    interior,
    interior_oracle,
)
from .model import Model, fixture_path, load_model, model_from_dict
from .order import FinPoset, Sieve, principal_downset, sieve_heyting, sieve_pullback, sieves_on
from .power import InternalRelation, RelSub, power_elements, power_presheaf
from .presheaf import Presheaf, SubPresheaf, classify, omega, product, subobject_of, terminal, validate

__version__ = "0.1.0"
