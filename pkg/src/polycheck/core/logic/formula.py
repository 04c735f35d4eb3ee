"""
Property formulas: Boolean combinations of integer-linear atoms with an
optional existential block.

Formulas are immutable and kept in negation normal form by the smart
constructors (conj, disj, negate, exists). Atoms carry one canonical shape
`expr op bound` with op in {=, <=, >=}; strict comparators never survive
construction.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from polycheck.core.math.linear import ExprLike, LinExpr
from polycheck.core.math.solver import Row, drop_upward_free, eliminate, enumerate_solutions
from polycheck.domain.enums import Comparator
from polycheck.domain.exceptions import (
    FormulaError,
    SolverRequiredError,
    UnboundVariableError,
    UnboundedPreimageError,
)

SatOracle = Callable[["Formula"], bool]

DNF_LIMIT = 256


class Formula:
    """Base class of the formula tree."""

    __slots__ = ()

    def __and__(self, other: "Formula") -> "Formula":
        return conj(self, other)

    def __or__(self, other: "Formula") -> "Formula":
        return disj(self, other)

    def __invert__(self) -> "Formula":
        return negate(self)


@dataclass(frozen=True)
class Const(Formula):
    value: bool

    def __str__(self) -> str:
        return "true" if self.value else "false"


TRUE = Const(True)
FALSE = Const(False)


@dataclass(frozen=True)
class Atom(Formula):
    expr: LinExpr
    op: Comparator
    bound: int

    def holds(self, env: Mapping[str, int]) -> bool:
        v = self.expr.evaluate(env)
        if self.op == Comparator.EQ:
            return v == self.bound
        if self.op == Comparator.LE:
            return v <= self.bound
        return v >= self.bound

    def __str__(self) -> str:
        return f"{self.expr.render()} {self.op.value} {self.bound}"


@dataclass(frozen=True)
class And(Formula):
    args: Tuple[Formula, ...]

    def __str__(self) -> str:
        return "(" + " and ".join(str(a) for a in self.args) + ")"


@dataclass(frozen=True)
class Or(Formula):
    args: Tuple[Formula, ...]

    def __str__(self) -> str:
        return "(" + " or ".join(str(a) for a in self.args) + ")"


@dataclass(frozen=True)
class Not(Formula):
    """Only ever wraps an Exists; every other negation is pushed to the atoms."""
    arg: Formula

    def __str__(self) -> str:
        return f"not {self.arg}"


@dataclass(frozen=True)
class Exists(Formula):
    variables: Tuple[str, ...]
    body: Formula

    def __str__(self) -> str:
        return f"exists {', '.join(self.variables)}. {self.body}"


# -----------------------------
# Smart constructors
# -----------------------------

_STRICT = {"<": (Comparator.LE, -1), ">": (Comparator.GE, 1)}
_OPS = {"=": Comparator.EQ, "==": Comparator.EQ, "<=": Comparator.LE, ">=": Comparator.GE}


def atom(lhs: ExprLike, op: Union[str, Comparator], rhs: ExprLike = 0) -> Formula:
    """Build `lhs op rhs`; constant atoms fold to TRUE/FALSE."""
    key = op.value if isinstance(op, Comparator) else str(op)
    shift = 0
    if key in _STRICT:
        comp, shift = _STRICT[key]
    elif key in _OPS:
        comp = _OPS[key]
    elif key in ("!=", "<>"):
        return disj(atom(lhs, "<", rhs), atom(lhs, ">", rhs))
    else:
        raise FormulaError(f"unknown comparator {op!r}")
    diff = LinExpr.of(lhs) - LinExpr.of(rhs)
    expr = diff.without_const()
    bound = -diff.const + shift
    if expr.is_constant:
        ok = {Comparator.EQ: 0 == bound, Comparator.LE: 0 <= bound, Comparator.GE: 0 >= bound}[comp]
        return TRUE if ok else FALSE
    if comp == Comparator.EQ and expr.terms[0][1] < 0:
        expr, bound = -expr, -bound
    return Atom(expr, comp, bound)


def conj(*parts: Formula) -> Formula:
    flat: List[Formula] = []
    for p in parts:
        if isinstance(p, Const):
            if not p.value:
                return FALSE
            continue
        if isinstance(p, And):
            flat.extend(p.args)
        else:
            flat.append(p)
    flat = list(dict.fromkeys(flat))
    if not flat:
        return TRUE
    if len(flat) == 1:
        return flat[0]
    return And(tuple(flat))


def disj(*parts: Formula) -> Formula:
    flat: List[Formula] = []
    for p in parts:
        if isinstance(p, Const):
            if p.value:
                return TRUE
            continue
        if isinstance(p, Or):
            flat.extend(p.args)
        else:
            flat.append(p)
    flat = list(dict.fromkeys(flat))
    if not flat:
        return FALSE
    if len(flat) == 1:
        return flat[0]
    return Or(tuple(flat))


def negate(f: Formula) -> Formula:
    if isinstance(f, Const):
        return FALSE if f.value else TRUE
    if isinstance(f, Atom):
        if f.op == Comparator.LE:
            return Atom(f.expr, Comparator.GE, f.bound + 1)
        if f.op == Comparator.GE:
            return Atom(f.expr, Comparator.LE, f.bound - 1)
        return disj(Atom(f.expr, Comparator.LE, f.bound - 1), Atom(f.expr, Comparator.GE, f.bound + 1))
    if isinstance(f, And):
        return disj(*(negate(a) for a in f.args))
    if isinstance(f, Or):
        return conj(*(negate(a) for a in f.args))
    if isinstance(f, Not):
        return f.arg
    if isinstance(f, Exists):
        return Not(f)
    raise FormulaError(f"not a formula: {f!r}")


def exists(variables: Iterable[str], body: Formula) -> Formula:
    names = tuple(dict.fromkeys(variables))
    used = free_vars(body)
    names = tuple(v for v in names if v in used)
    if not names:
        return body
    if isinstance(body, Exists):
        return Exists(names + tuple(v for v in body.variables if v not in names), body.body)
    return Exists(names, body)


def to_nnf(f: Formula) -> Formula:
    """Rebuild through the smart constructors (a no-op on constructed formulas)."""
    if isinstance(f, (Const, Atom)):
        return f
    if isinstance(f, And):
        return conj(*(to_nnf(a) for a in f.args))
    if isinstance(f, Or):
        return disj(*(to_nnf(a) for a in f.args))
    if isinstance(f, Not):
        inner = to_nnf(f.arg)
        return negate(inner)
    if isinstance(f, Exists):
        return exists(f.variables, to_nnf(f.body))
    raise FormulaError(f"not a formula: {f!r}")


# -----------------------------
# Structure
# -----------------------------

def free_vars(f: Formula) -> FrozenSet[str]:
    if isinstance(f, Const):
        return frozenset()
    if isinstance(f, Atom):
        return frozenset(f.expr.variables)
    if isinstance(f, (And, Or)):
        out: FrozenSet[str] = frozenset()
        for a in f.args:
            out |= free_vars(a)
        return out
    if isinstance(f, Not):
        return free_vars(f.arg)
    if isinstance(f, Exists):
        return free_vars(f.body) - set(f.variables)
    raise FormulaError(f"not a formula: {f!r}")


def bound_vars(f: Formula) -> FrozenSet[str]:
    if isinstance(f, (And, Or)):
        out: FrozenSet[str] = frozenset()
        for a in f.args:
            out |= bound_vars(a)
        return out
    if isinstance(f, Not):
        return bound_vars(f.arg)
    if isinstance(f, Exists):
        return frozenset(f.variables) | bound_vars(f.body)
    return frozenset()


def is_quantifier_free(f: Formula) -> bool:
    return not bound_vars(f)


def conjuncts(f: Formula) -> Tuple[Formula, ...]:
    if isinstance(f, And):
        return f.args
    if f == TRUE:
        return ()
    return (f,)


def rename(f: Formula, mapping: Mapping[str, str]) -> Formula:
    """Rename free variables; bound variables shadow the mapping."""
    if isinstance(f, Const):
        return f
    if isinstance(f, Atom):
        return atom(f.expr.rename(mapping), f.op, f.bound)
    if isinstance(f, And):
        return conj(*(rename(a, mapping) for a in f.args))
    if isinstance(f, Or):
        return disj(*(rename(a, mapping) for a in f.args))
    if isinstance(f, Not):
        return negate(rename(f.arg, mapping))
    if isinstance(f, Exists):
        inner = {k: v for k, v in mapping.items() if k not in f.variables}
        return Exists(f.variables, rename(f.body, inner))
    raise FormulaError(f"not a formula: {f!r}")


def rename_bound(f: Formula, fresh: Callable[[str], str]) -> Formula:
    """Alpha-rename every bound variable through fresh()."""
    if isinstance(f, (Const, Atom)):
        return f
    if isinstance(f, And):
        return conj(*(rename_bound(a, fresh) for a in f.args))
    if isinstance(f, Or):
        return disj(*(rename_bound(a, fresh) for a in f.args))
    if isinstance(f, Not):
        return negate(rename_bound(f.arg, fresh))
    if isinstance(f, Exists):
        mapping = {v: fresh(v) for v in f.variables}
        return Exists(tuple(mapping[v] for v in f.variables), rename(rename_bound(f.body, fresh), mapping))
    raise FormulaError(f"not a formula: {f!r}")


def substitute(f: Formula, values: Mapping[str, int]) -> Formula:
    """Partially evaluate: replace free variables found in values by integers."""
    if isinstance(f, Const):
        return f
    if isinstance(f, Atom):
        e = f.expr.partial(values)
        return atom(e, f.op, f.bound)
    if isinstance(f, And):
        return conj(*(substitute(a, values) for a in f.args))
    if isinstance(f, Or):
        return disj(*(substitute(a, values) for a in f.args))
    if isinstance(f, Not):
        return negate(substitute(f.arg, values))
    if isinstance(f, Exists):
        inner = {k: v for k, v in values.items() if k not in f.variables}
        return exists(f.variables, substitute(f.body, inner))
    raise FormulaError(f"not a formula: {f!r}")


def atoms_of(f: Formula) -> Tuple[Atom, ...]:
    if isinstance(f, Atom):
        return (f,)
    if isinstance(f, (And, Or)):
        return tuple(a for g in f.args for a in atoms_of(g))
    if isinstance(f, (Not,)):
        return atoms_of(f.arg)
    if isinstance(f, Exists):
        return atoms_of(f.body)
    return ()


def to_dnf(f: Formula, limit: int = DNF_LIMIT) -> Optional[List[Tuple[Atom, ...]]]:
    """Quantifier-free f as a list of atom conjunctions; None beyond limit."""
    if isinstance(f, Const):
        return [()] if f.value else []
    if isinstance(f, Atom):
        return [(f,)]
    if isinstance(f, Or):
        out: List[Tuple[Atom, ...]] = []
        for a in f.args:
            part = to_dnf(a, limit)
            if part is None:
                return None
            out.extend(part)
            if len(out) > limit:
                return None
        return out
    if isinstance(f, And):
        acc: List[Tuple[Atom, ...]] = [()]
        for a in f.args:
            part = to_dnf(a, limit)
            if part is None:
                return None
            acc = [x + y for x, y in itertools.product(acc, part)]
            if len(acc) > limit:
                return None
        return acc
    return None


def to_cnf(f: Formula, limit: int = DNF_LIMIT) -> Optional[List[FrozenSet[Atom]]]:
    """Quantifier-free f as clauses (frozensets of atoms read disjunctively)."""
    dual = to_dnf(negate(f), limit)
    if dual is None:
        return None
    clauses = []
    for cube in dual:
        clause = frozenset(a for lit in cube for a in _atoms_of_negation(lit))
        clauses.append(clause)
    return list(dict.fromkeys(clauses))


def _atoms_of_negation(a: Atom) -> Tuple[Atom, ...]:
    n = negate(a)
    return (n,) if isinstance(n, Atom) else tuple(x for x in atoms_of(n))


def clause_formula(clause: Iterable[Formula]) -> Formula:
    return disj(*sorted(clause, key=str))


# -----------------------------
# Evaluation
# -----------------------------

def _lookup_env(env: Mapping[str, int], places: Optional[Iterable[str]]) -> Callable[[str], int]:
    from polycheck.domain.models import Marking

    known = set(places) if places is not None else None

    def get(name: str) -> int:
        if name in env:
            return int(env[name])
        if known is not None:
            if name in known:
                return 0
            raise UnboundVariableError(name)
        if isinstance(env, Marking):
            return 0
        raise UnboundVariableError(name)

    return get


def evaluate(
    f: Formula,
    m: Mapping[str, int],
    places: Optional[Iterable[str]] = None,
    *,
    solver: Optional[SatOracle] = None,
) -> bool:
    """
    Truth of f at marking m.

    Free variables read from m; with places given, places absent from m read 0
    and anything else is unbound. A Marking without places is total. Existential
    blocks are decided by substitution and bounded search when they are bounded,
    otherwise by the solver callback.
    """
    get = _lookup_env(m, places)
    values = {v: get(v) for v in free_vars(f)}
    return _eval_closed(substitute(f, values), solver)


def _eval_closed(f: Formula, solver: Optional[SatOracle]) -> bool:
    if isinstance(f, Const):
        return f.value
    if isinstance(f, Atom):
        raise UnboundVariableError(f.expr.variables[0])
    if isinstance(f, And):
        return all(_eval_closed(a, solver) for a in f.args)
    if isinstance(f, Or):
        return any(_eval_closed(a, solver) for a in f.args)
    if isinstance(f, Not):
        return not _eval_closed(f.arg, solver)
    if isinstance(f, Exists):
        return _exists_holds(f, solver)
    raise FormulaError(f"not a formula: {f!r}")


def _exists_holds(f: Exists, solver: Optional[SatOracle]) -> bool:
    variables = sorted(bound_vars(f))
    body = _strip_exists(f)
    dnf = to_dnf(body)
    if dnf is not None:
        try:
            return any(_cube_feasible(cube, variables) for cube in dnf)
        except UnboundedPreimageError:
            pass
    if solver is None:
        raise SolverRequiredError(f"cannot decide {f} without a solver")
    return bool(solver(f))


def _strip_exists(f: Formula) -> Formula:
    if isinstance(f, Exists):
        return _strip_exists(f.body)
    if isinstance(f, And):
        return conj(*(_strip_exists(a) for a in f.args))
    if isinstance(f, Or):
        return disj(*(_strip_exists(a) for a in f.args))
    if isinstance(f, Not):
        raise SolverRequiredError("negated existential inside an existential block")
    return f


def atom_rows(atoms: Sequence[Atom]) -> List[Row]:
    return [(dict(a.expr.terms), a.op, a.bound) for a in atoms]


def _cube_feasible(cube: Sequence[Atom], variables: Sequence[str]) -> bool:
    rows = atom_rows(cube)
    elim = eliminate(rows, variables)
    rest = [v for v in variables if v not in elim.substitution]
    residual, rest = drop_upward_free(elim.residual, rest)
    return next(enumerate_solutions(residual, rest), None) is not None


def eliminate_exists(f: Formula) -> Formula:
    """
    Remove existential variables defined by unit-coefficient equalities.
    Existentials are distributed over disjunctions when the body has a small
    DNF; variables that survive substitution stay quantified.
    """
    if isinstance(f, (Const, Atom)):
        return f
    if isinstance(f, And):
        return conj(*(eliminate_exists(a) for a in f.args))
    if isinstance(f, Or):
        return disj(*(eliminate_exists(a) for a in f.args))
    if isinstance(f, Not):
        return negate(eliminate_exists(f.arg))
    if isinstance(f, Exists):
        body = _strip_exists(f)
        variables = tuple(sorted(bound_vars(f)))
        dnf = to_dnf(body)
        if dnf is None:
            return exists(variables, body)
        out = []
        for cube in dnf:
            elim = eliminate(atom_rows(cube), variables)
            residual = conj(*(atom(LinExpr(tuple(c.items())), op, b) for c, op, b in elim.residual))
            left = [v for v in variables if v not in elim.substitution]
            out.append(exists(left, residual))
        return disj(*out)
    raise FormulaError(f"not a formula: {f!r}")


__all__ = [
    "Formula",
    "Const",
    "TRUE",
    "FALSE",
    "Atom",
    "And",
    "Or",
    "Not",
    "Exists",
    "atom",
    "conj",
    "disj",
    "negate",
    "exists",
    "to_nnf",
    "free_vars",
    "bound_vars",
    "is_quantifier_free",
    "conjuncts",
    "rename",
    "rename_bound",
    "substitute",
    "atoms_of",
    "to_dnf",
    "to_cnf",
    "clause_formula",
    "evaluate",
    "eliminate_exists",
    "atom_rows",
]
