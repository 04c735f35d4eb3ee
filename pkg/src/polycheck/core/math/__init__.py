from __future__ import annotations

from .linear import LinExpr, parse_linexpr
from .solver import Elimination, eliminate, enumerate_solutions, first_solution

__all__ = [
    "Elimination",
    "LinExpr",
    "eliminate",
    "enumerate_solutions",
    "first_solution",
    "parse_linexpr",
]
