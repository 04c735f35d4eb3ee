from polycheck.core.reduction.reducer import ReductionTrace, reduce, reduction_ratio, render_system
from polycheck.core.reduction.rules import (
    RULES,
    FreshNames,
    ReductionStep,
    try_agg,
    try_concat,
    try_constant,
    try_constant_source,
    try_dead_transition,
    try_red,
    try_redundant_place,
    try_redundant_transition,
    try_shortcut,
    try_source,
)

__all__ = [
    "RULES",
    "FreshNames",
    "ReductionStep",
    "ReductionTrace",
    "reduce",
    "reduction_ratio",
    "render_system",
    "try_agg",
    "try_concat",
    "try_constant",
    "try_constant_source",
    "try_dead_transition",
    "try_red",
    "try_redundant_place",
    "try_redundant_transition",
    "try_shortcut",
    "try_source",
]
