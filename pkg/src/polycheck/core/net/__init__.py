from __future__ import annotations

from .firing import (
    covers,
    enabled_transitions,
    fire,
    fire_sequence,
    incidence,
    is_enabled,
    merge_markings,
    observe,
    successors,
)

__all__ = [
    "covers",
    "enabled_transitions",
    "fire",
    "fire_sequence",
    "incidence",
    "is_enabled",
    "merge_markings",
    "observe",
    "successors",
]
