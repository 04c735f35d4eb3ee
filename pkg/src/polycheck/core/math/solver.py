from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Mapping, Optional, Protocol, Sequence, Tuple

from polycheck.core.math.linear import LinExpr
from polycheck.domain.enums import Comparator
from polycheck.domain.exceptions import UnboundedPreimageError


class ConstraintLike(Protocol):
    """expr <op> bound, with expr free of constants."""
    expr: LinExpr
    op: Comparator
    bound: int


# (coeffs, op, bound): sum(coeffs[v] * v) op bound
Row = Tuple[Dict[str, int], Comparator, int]


@dataclass(frozen=True)
class Elimination:
    """
    Result of Gaussian substitution.
    substitution maps each eliminated variable to the expression that defines it
    (already expressed over the remaining variables); residual holds the rest,
    including the nonnegativity side conditions of the eliminated variables.
    """
    substitution: Mapping[str, LinExpr]
    residual: Tuple[Row, ...]
    eliminated: Tuple[str, ...] = field(default=())


def to_row(c: ConstraintLike) -> Row:
    return (dict(c.expr.terms), c.op, int(c.bound) - c.expr.const)


def _row_substitute(row: Row, var: str, expr: LinExpr) -> Row:
    coeffs, op, bound = row
    c = coeffs.get(var, 0)
    if not c:
        return row
    out = {v: k for v, k in coeffs.items() if v != var}
    for v, k in expr.terms:
        out[v] = out.get(v, 0) + c * k
    out = {v: k for v, k in out.items() if k}
    return (out, op, bound - c * expr.const)


def _row_holds(row: Row, env: Mapping[str, int]) -> bool:
    coeffs, op, bound = row
    lhs = sum(k * env[v] for v, k in coeffs.items())
    if op == Comparator.EQ:
        return lhs == bound
    if op == Comparator.LE:
        return lhs <= bound
    return lhs >= bound


def eliminate(rows: Sequence[Row], eliminable: Sequence[str]) -> Elimination:
    """
    Substitute away eliminable variables defined by an equality in which
    they carry a unit coefficient. Variables are nonnegative integers, so
    every substituted definition adds `definition >= 0` to the residual.
    """
    work: List[Row] = [(dict(c), op, b) for c, op, b in rows]
    subst: Dict[str, LinExpr] = {}
    order: List[str] = []
    targets = list(eliminable)
    progress = True
    while progress:
        progress = False
        for i, (coeffs, op, bound) in enumerate(work):
            if op != Comparator.EQ:
                continue
            pick = next((v for v in targets if v not in subst and coeffs.get(v) in (1, -1)), None)
            if pick is None:
                continue
            c = coeffs[pick]
            # c*pick + rest = bound  =>  pick = (bound - rest) / c
            rest = LinExpr(tuple((v, k) for v, k in coeffs.items() if v != pick))
            definition = (LinExpr.constant(bound) - rest).scale(c)
            del work[i]
            work = [_row_substitute(r, pick, definition) for r in work]
            for v in list(subst):
                subst[v] = subst[v].substitute({pick: definition})
            subst[pick] = definition
            order.append(pick)
            work.append((dict(definition.without_const().terms), Comparator.GE, -definition.const))
            progress = True
            break
    residual = tuple(r for r in work if r[0] or not _row_holds(r, {}))
    return Elimination(substitution=subst, residual=residual, eliminated=tuple(order))


# -----------------------------
# Bounded enumeration
# -----------------------------

def _floor_div(p: int, q: int) -> int:
    return p // q


def _ceil_div(p: int, q: int) -> int:
    return -((-p) // q)


def _propagate(rows: Sequence[Row], lo: Dict[str, int], hi: Dict[str, Optional[int]]) -> bool:
    """Interval propagation to a fixpoint; False when some interval empties."""
    for _ in range(64):
        changed = False
        for coeffs, op, bound in rows:
            if not coeffs:
                if not _row_holds((coeffs, op, bound), {}):
                    return False
                continue
            mins: Dict[str, Optional[int]] = {}
            maxs: Dict[str, Optional[int]] = {}
            for v, k in coeffs.items():
                if k > 0:
                    mins[v] = k * lo[v]
                    maxs[v] = None if hi[v] is None else k * hi[v]
                else:
                    mins[v] = None if hi[v] is None else k * hi[v]
                    maxs[v] = k * lo[v]
            if op in (Comparator.LE, Comparator.EQ):
                inf = [v for v, x in mins.items() if x is None]
                total = sum(x for x in mins.values() if x is not None)
                for v, k in coeffs.items():
                    if inf and (len(inf) > 1 or inf[0] != v):
                        continue
                    rest = total - (mins[v] if mins[v] is not None else 0)
                    r = bound - rest
                    if k > 0:
                        new = _floor_div(r, k)
                        if hi[v] is None or new < hi[v]:
                            hi[v] = new
                            changed = True
                    else:
                        new = _ceil_div(r, k)
                        if new > lo[v]:
                            lo[v] = new
                            changed = True
            if op in (Comparator.GE, Comparator.EQ):
                inf = [v for v, x in maxs.items() if x is None]
                total = sum(x for x in maxs.values() if x is not None)
                for v, k in coeffs.items():
                    if inf and (len(inf) > 1 or inf[0] != v):
                        continue
                    rest = total - (maxs[v] if maxs[v] is not None else 0)
                    r = bound - rest
                    if k > 0:
                        new = _ceil_div(r, k)
                        if new > lo[v]:
                            lo[v] = new
                            changed = True
                    else:
                        new = _floor_div(r, k)
                        if hi[v] is None or new < hi[v]:
                            hi[v] = new
                            changed = True
            for v in coeffs:
                if hi[v] is not None and lo[v] > hi[v]:
                    return False
        if not changed:
            return True
    return True


def _search(
    rows: Sequence[Row],
    order: Sequence[str],
    lo: Dict[str, int],
    hi: Dict[str, Optional[int]],
    cap: Optional[int],
    project: int,
) -> Iterator[Dict[str, int]]:
    if not _propagate(rows, lo, hi):
        return
    pick = None
    for i, v in enumerate(order):
        if hi[v] is None or lo[v] < hi[v]:
            pick = i
            break
    if pick is None:
        env = {v: lo[v] for v in order}
        if all(_row_holds(r, env) for r in rows):
            yield env
        return
    if pick >= project:
        # Projected variables are all fixed; one witness for the rest suffices.
        fixed = {v: lo[v] for v in order[:project]}
        for env in _branch(rows, order, lo, hi, cap, project, pick):
            env.update(fixed)
            yield env
            return
        return
    yield from _branch(rows, order, lo, hi, cap, project, pick)


def _branch(rows, order, lo, hi, cap, project, pick) -> Iterator[Dict[str, int]]:
    v = order[pick]
    top = hi[v]
    if top is None:
        if cap is None:
            unbounded = [u for u in order if hi[u] is None]
            raise UnboundedPreimageError(unbounded)
        top = max(cap, lo[v])
    for val in range(lo[v], top + 1):
        lo2 = dict(lo)
        hi2 = dict(hi)
        lo2[v] = val
        hi2[v] = val
        yield from _search(rows, order, lo2, hi2, cap, project)


def enumerate_solutions(
    rows: Sequence[Row],
    variables: Sequence[str],
    *,
    fixed: Optional[Mapping[str, int]] = None,
    project: Optional[Sequence[str]] = None,
    cap: Optional[int] = None,
) -> Iterator[Dict[str, int]]:
    """
    Nonnegative integer solutions of rows over variables.

    fixed pins variables to values (they are substituted first). When project
    is given, solutions are yielded once per distinct assignment of the
    projected variables (the other variables only need to admit a witness).
    cap bounds every variable that propagation leaves unbounded; without it an
    unbounded branching variable raises UnboundedPreimageError.
    """
    fixed = dict(fixed or {})
    work: List[Row] = []
    for coeffs, op, bound in rows:
        b = bound
        kept = {}
        for v, k in coeffs.items():
            if v in fixed:
                b -= k * int(fixed[v])
            else:
                kept[v] = k
        work.append((kept, op, b))

    free = [v for v in variables if v not in fixed]
    mentioned = {v for c, _, _ in work for v in c}
    unknown = sorted(mentioned - set(free))
    if unknown:
        raise UnboundedPreimageError(unknown)

    head = [v for v in (project or free) if v in free]
    tail = [v for v in free if v not in head]
    order = head + tail
    lo: Dict[str, int] = {v: 0 for v in order}
    hi: Dict[str, Optional[int]] = {v: None for v in order}
    # Variables no constraint mentions are free: fix them at 0 unless projected.
    for v in tail:
        if v not in mentioned:
            hi[v] = 0
    seen = set()
    for env in _search(work, order, lo, hi, cap, len(head)):
        env.update(fixed)
        if project is not None:
            key = tuple(env[v] for v in head)
            if key in seen:
                continue
            seen.add(key)
        yield env


def first_solution(
    rows: Sequence[Row],
    variables: Sequence[str],
    *,
    fixed: Optional[Mapping[str, int]] = None,
    cap: Optional[int] = None,
) -> Optional[Dict[str, int]]:
    return next(enumerate_solutions(rows, variables, fixed=fixed, cap=cap), None)


def drop_upward_free(rows: Sequence[Row], variables: Sequence[str]) -> Tuple[List[Row], List[str]]:
    """
    Remove variables that only ever appear where a larger value helps
    (`>=` with a positive coefficient, `<=` with a negative one), together
    with their rows: a large enough value satisfies all of them. Repeats
    until no such variable is left.
    """
    work = list(rows)
    left = list(variables)
    changed = True
    while changed:
        changed = False
        for v in list(left):
            touching = [r for r in work if r[0].get(v, 0)]
            if all(
                (op == Comparator.GE and c[v] > 0) or (op == Comparator.LE and c[v] < 0)
                for c, op, _ in touching
            ):
                work = [r for r in work if not r[0].get(v, 0)]
                left.remove(v)
                changed = True
    return work, left


__all__ = [
    "ConstraintLike",
    "Elimination",
    "Row",
    "drop_upward_free",
    "eliminate",
    "enumerate_solutions",
    "first_solution",
    "to_row",
]
