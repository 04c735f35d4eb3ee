from __future__ import annotations

from .formula import (
    FALSE,
    TRUE,
    And,
    Atom,
    Const,
    Exists,
    Formula,
    Not,
    Or,
    atom,
    conj,
    disj,
    eliminate_exists,
    evaluate,
    exists,
    free_vars,
    negate,
    rename,
    substitute,
    to_cnf,
    to_nnf,
)
from .predicates import (
    bounded_predicate,
    cover_predicate,
    dead_predicate,
    enabled_predicate,
    is_syntactically_monotonic_goal,
    marking_cube,
)

__all__ = [
    "FALSE",
    "TRUE",
    "And",
    "Atom",
    "Const",
    "Exists",
    "Formula",
    "Not",
    "Or",
    "atom",
    "bounded_predicate",
    "conj",
    "cover_predicate",
    "dead_predicate",
    "disj",
    "eliminate_exists",
    "enabled_predicate",
    "evaluate",
    "exists",
    "free_vars",
    "is_syntactically_monotonic_goal",
    "marking_cube",
    "negate",
    "rename",
    "substitute",
    "to_cnf",
    "to_nnf",
]
