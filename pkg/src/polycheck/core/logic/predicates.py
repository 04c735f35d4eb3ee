"""Canonical predicates over net markings."""
from __future__ import annotations

from typing import Iterable, Mapping, Optional

from polycheck.core.logic.formula import (
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
    negate,
)
from polycheck.core.math.linear import LinExpr
from polycheck.domain.enums import Comparator
from polycheck.domain.models import PetriNet


def _name(names: Optional[Mapping[str, str]], p: str) -> str:
    return names[p] if names is not None else p


def enabled_predicate(net: PetriNet, t: str, names: Optional[Mapping[str, str]] = None) -> Formula:
    """ENBL_t: every input place holds at least Pre(t, p) tokens."""
    pre = net.pre_of(t)
    return conj(*(atom(LinExpr.var(_name(names, p)), ">=", pre[p]) for p in net.places if pre.get(p)))


def dead_predicate(net: PetriNet, names: Optional[Mapping[str, str]] = None) -> Formula:
    return conj(*(negate(enabled_predicate(net, t, names)) for t in net.transitions))


def bounded_predicate(net: PetriNet, k: int, names: Optional[Mapping[str, str]] = None) -> Formula:
    return conj(*(atom(LinExpr.var(_name(names, p)), "<=", k) for p in net.places))


def marking_cube(m: Mapping[str, int], places: Iterable[str], names: Optional[Mapping[str, str]] = None) -> Formula:
    """The cube pinning every listed place to its token count."""
    return conj(*(atom(LinExpr.var(_name(names, p)), "=", int(m.get(p, 0))) for p in places))


def cover_predicate(m: Mapping[str, int], places: Iterable[str], names: Optional[Mapping[str, str]] = None) -> Formula:
    """Markings covering m: p >= m(p), zero rows omitted."""
    return conj(*(atom(LinExpr.var(_name(names, p)), ">=", int(m.get(p, 0))) for p in places if m.get(p, 0)))


def is_syntactically_monotonic_goal(f: Formula) -> bool:
    """
    Sufficient test for upward-closed models: And/Or over atoms
    `sum(a_i * x_i) >= k` with every a_i >= 0.
    """
    if isinstance(f, Const):
        return True
    if isinstance(f, Atom):
        return f.op == Comparator.GE and all(c >= 0 for _, c in f.expr.terms)
    if isinstance(f, (And, Or)):
        return all(is_syntactically_monotonic_goal(a) for a in f.args)
    if isinstance(f, (Not, Exists)):
        return False
    return False


__all__ = [
    "enabled_predicate",
    "dead_predicate",
    "bounded_predicate",
    "marking_cube",
    "cover_predicate",
    "is_syntactically_monotonic_goal",
    "TRUE",
]
