"""
Query transformation through a polyhedral abstraction.

A goal F1 over the places of N1 becomes, over the places of N2,
    F2(y) = exists x, z. E~(x, y, z) and F1(x)
where E~ is E with N1 places renamed to x, N2 places to y, and the
shared-place equalities x_i = y_j added.
"""
from __future__ import annotations

from typing import Dict, Iterator, Mapping, Optional, Sequence

from polycheck.core.abstraction.system import LinearSystem
from polycheck.core.logic.formula import Formula, atom, bound_vars, conj, exists, free_vars, rename, rename_bound
from polycheck.core.math.linear import LinExpr
from polycheck.core.math.solver import enumerate_solutions
from polycheck.domain.enums import Comparator
from polycheck.domain.exceptions import LinearSystemError, VectorLengthError
from polycheck.domain.models import Marking


BOUND_SUFFIX = "@1"


def make_tilde_E(
    system: LinearSystem,
    initial_places: Sequence[str],
    reduced_places: Sequence[str],
    x: Sequence[str],
    y: Sequence[str],
) -> Formula:
    if len(x) != len(initial_places):
        raise VectorLengthError(f"|x| = {len(x)} but N1 has {len(initial_places)} places")
    if len(y) != len(reduced_places):
        raise VectorLengthError(f"|y| = {len(y)} but N2 has {len(reduced_places)} places")
    xs, ys, fs = set(x), set(y), set(system.fresh)
    if len(xs) != len(x) or len(ys) != len(y) or xs & ys or xs & fs or ys & fs:
        raise VectorLengthError("x, y and the fresh variables must be pairwise disjoint")

    x_of = dict(zip(initial_places, x))
    y_of = dict(zip(reduced_places, y))
    # A shared place reads through its N1 copy; the equalities below tie it to N2.
    mapping: Dict[str, str] = dict(y_of)
    mapping.update(x_of)
    parts = [rename(c.as_formula(), mapping) for c in system.constraints]
    for p in initial_places:
        if p in y_of:
            parts.append(atom(LinExpr.var(x_of[p]), "=", LinExpr.var(y_of[p])))
    return conj(*parts)


def e_transform(goal: Formula, system: LinearSystem) -> Formula:
    """
    E-transform of goal: a formula over the reduced places, existentially
    quantifying the renamed N1 places and every fresh variable of the system.
    """
    P1 = system.initial_places
    P2 = system.reduced_places
    taken = set(P1) | set(P2) | set(system.fresh) | free_vars(goal) | bound_vars(goal)

    def fresh_name(base: str) -> str:
        n = 1
        cand = f"{base}{BOUND_SUFFIX}"
        while cand in taken:
            n += 1
            cand = f"{base}@{n}"
        taken.add(cand)
        return cand

    x = [fresh_name(p) for p in P1]
    # Fresh variables of E are renamed too so they cannot capture goal variables.
    z_map = {v: fresh_name(v) for v in system.fresh}
    renamed = LinearSystem(
        tuple(c.rename(z_map) for c in system.constraints),
        P1,
        P2,
        tuple(z_map[v] for v in system.fresh),
    )
    tilde = make_tilde_E(renamed, P1, P2, x, list(P2))
    body_goal = rename(rename_bound(goal, fresh_name), dict(zip(P1, x)))
    extra = free_vars(body_goal) - set(x) - set(P2)
    if extra:
        raise LinearSystemError(f"goal mentions variables outside the initial net: {sorted(extra)}")
    return exists(list(x) + [z_map[v] for v in system.fresh], conj(tilde, body_goal))


# -----------------------------
# Preimages
# -----------------------------

def preimage(
    system: LinearSystem,
    m2: Mapping[str, int],
    *,
    bound: Optional[int] = None,
) -> Iterator[Marking]:
    """
    N1 markings compatible with the N2 marking m2, in enumeration order.
    bound caps the token count of variables the system leaves unbounded.
    """
    fixed = {p: int(m2.get(p, 0)) for p in system.reduced_places}
    project = [p for p in system.initial_places if p not in fixed]
    variables = project + list(system.fresh)
    for env in enumerate_solutions(system.rows(), variables, fixed=fixed, project=project, cap=bound):
        yield Marking.of({p: env[p] for p in system.initial_places})


def count_preimage(system: LinearSystem, m2: Mapping[str, int], bound: Optional[int] = None) -> int:
    return sum(1 for _ in preimage(system, m2, bound=bound))


def lift_marking(system: LinearSystem, m2: Mapping[str, int], bound: Optional[int] = None) -> Optional[Marking]:
    return next(preimage(system, m2, bound=bound), None)


def compatible_images(
    system: LinearSystem,
    m1: Mapping[str, int],
    *,
    bound: Optional[int] = None,
) -> Iterator[Marking]:
    """N2 markings m2 with m1 and m2 jointly satisfying the system."""
    fixed = {p: int(m1.get(p, 0)) for p in system.initial_places}
    project = [p for p in system.reduced_places if p not in fixed]
    variables = project + list(system.fresh)
    for env in enumerate_solutions(system.rows(), variables, fixed=fixed, project=project, cap=bound):
        yield Marking.of({p: env[p] for p in system.reduced_places})


def is_compatible(system: LinearSystem, m1: Mapping[str, int], m2: Mapping[str, int]) -> bool:
    """m1 and m2 agree on shared places and m1 u m2 satisfies the system (fresh variables existential)."""
    for p in system.shared_places:
        if m1.get(p, 0) != m2.get(p, 0):
            return False
    fixed = {p: int(m1.get(p, 0)) for p in system.initial_places}
    fixed.update({p: int(m2.get(p, 0)) for p in system.reduced_places})
    sol = enumerate_solutions(system.rows(), list(system.fresh), fixed=fixed, cap=None)
    return next(sol, None) is not None


def is_monotone_system(system: LinearSystem) -> bool:
    """
    Equality-only system whose constraints read `v = sum of nonnegative terms + k`
    with k >= 0 on one side. Goals transformed through such systems keep
    upward-closed models.
    """
    for c in system.constraints:
        if c.op != Comparator.EQ:
            return False
        if not (_is_sum_shape(c.lhs, c.rhs) or _is_sum_shape(c.rhs, c.lhs)):
            return False
    return True


def _is_sum_shape(single: LinExpr, rest: LinExpr) -> bool:
    if single.const or len(single.terms) != 1 or single.terms[0][1] != 1:
        return False
    return rest.const >= 0 and all(k > 0 for _, k in rest.terms)


__all__ = [
    "BOUND_SUFFIX",
    "compatible_images",
    "count_preimage",
    "e_transform",
    "is_compatible",
    "is_monotone_system",
    "lift_marking",
    "make_tilde_E",
    "preimage",
]
