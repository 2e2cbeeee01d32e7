"""Tableau decision procedures for the description logics SHIQ and SI."""

from .errors import BudgetExceeded, KbError, NonSimpleRoleInNumberRestriction, NotSiConcept, ShiqError
from .kb import Terminology, classify, internalise_sat, internalise_subsumes, is_satisfiable, subsumes
from .kbfile import parse_concept, parse_kb
from .oracle import eval_concept, find_model
from .shiq import SAT, UNSAT, decide_sat, engine_bounds
from .si import si_decide_sat, si_decide_sat_trace
from .syntax import EMPTY_RBOX, Role, close_hierarchy, nnf

__all__ = [
    "BudgetExceeded", "KbError", "NonSimpleRoleInNumberRestriction", "NotSiConcept", "ShiqError",
    "Terminology", "classify", "internalise_sat", "internalise_subsumes", "is_satisfiable", "subsumes",
    "parse_concept", "parse_kb", "eval_concept", "find_model",
    "SAT", "UNSAT", "decide_sat", "engine_bounds", "si_decide_sat", "si_decide_sat_trace",
    "EMPTY_RBOX", "Role", "close_hierarchy", "nnf",
]
