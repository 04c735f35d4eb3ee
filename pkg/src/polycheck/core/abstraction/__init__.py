from __future__ import annotations

from .system import Constraint, LinearSystem, at_most, equation, parse_system
from .transform import (
    count_preimage,
    e_transform,
    is_compatible,
    is_monotone_system,
    lift_marking,
    make_tilde_E,
    preimage,
)

__all__ = [
    "Constraint",
    "LinearSystem",
    "at_most",
    "count_preimage",
    "e_transform",
    "equation",
    "is_compatible",
    "is_monotone_system",
    "lift_marking",
    "make_tilde_E",
    "parse_system",
    "preimage",
]
