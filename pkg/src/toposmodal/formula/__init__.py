"""Modal formula language: syntax, parser, evaluator and reports."""
from .parser import parse, tokenize
from .reports import BarcanReport, SetLevelReport, barcan_report, eval_set_level
from .semantics import (
    Evaluator,
    ForceResult,
    Interpretation,
    check_formula,
    desugar,
    force,
    interpret,
    is_valid,
    resolve_modality,
    stage_table,
)
from .syntax import (
    And,
    Atom,
    Bottom,
    Box,
    Dia,
    Eq,
    Exists,
    ExistsE,
    Forall,
    Formula,
    Implies,
    Not,
    Or,
    Top,
    free_vars,
    to_text,
)

__all__ = [
    "And", "Atom", "BarcanReport", "Bottom", "Box", "Dia", "Eq", "Evaluator", "Exists",
    "ExistsE", "Forall", "ForceResult", "Formula", "Implies", "Interpretation", "Not", "Or",
    "SetLevelReport", "Top", "barcan_report", "check_formula", "desugar", "eval_set_level",
    "force", "free_vars", "interpret", "is_valid", "parse", "resolve_modality", "stage_table",
    "to_text", "tokenize",
]
