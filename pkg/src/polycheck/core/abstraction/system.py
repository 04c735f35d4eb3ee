"""Linear systems tying the places of an initial net to those of a reduced net."""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Mapping, Sequence, Tuple

from polycheck.core.logic.formula import Formula, atom, conj
from polycheck.core.math.linear import LinExpr, parse_linexpr
from polycheck.core.math.solver import Row
from polycheck.domain.enums import Comparator
from polycheck.domain.exceptions import LinearSystemError, ParseError


@dataclass(frozen=True)
class Constraint:
    lhs: LinExpr
    op: Comparator
    rhs: LinExpr

    def __post_init__(self) -> None:
        if self.op not in (Comparator.EQ, Comparator.LE):
            raise LinearSystemError(f"system constraints use = or <=, not {self.op.value}")

    @property
    def variables(self) -> FrozenSet[str]:
        return frozenset(self.lhs.variables) | frozenset(self.rhs.variables)

    def as_formula(self) -> Formula:
        return atom(self.lhs, self.op, self.rhs)

    def row(self) -> Row:
        diff = self.lhs - self.rhs
        return (dict(diff.terms), self.op, -diff.const)

    def rename(self, mapping: Mapping[str, str]) -> "Constraint":
        return Constraint(self.lhs.rename(mapping), self.op, self.rhs.rename(mapping))

    def render(self) -> str:
        return f"{self.lhs.render()} {self.op.value} {self.rhs.render()}"

    def __str__(self) -> str:
        return self.render()


def equation(lhs, rhs) -> Constraint:
    return Constraint(LinExpr.of(lhs), Comparator.EQ, LinExpr.of(rhs))


def at_most(lhs, rhs) -> Constraint:
    return Constraint(LinExpr.of(lhs), Comparator.LE, LinExpr.of(rhs))


@dataclass(frozen=True)
class LinearSystem:
    """
    Ordered conjunction of constraints over the places of N1 (initial_places),
    the places of N2 (reduced_places) and fresh variables. A shared place name
    denotes the same value in both nets.
    """
    constraints: Tuple[Constraint, ...]
    initial_places: Tuple[str, ...]
    reduced_places: Tuple[str, ...]
    fresh: Tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "constraints", tuple(self.constraints))
        object.__setattr__(self, "initial_places", tuple(self.initial_places))
        object.__setattr__(self, "reduced_places", tuple(self.reduced_places))
        object.__setattr__(self, "fresh", tuple(self.fresh))
        declared = set(self.initial_places) | set(self.reduced_places) | set(self.fresh)
        overlap = set(self.fresh) & (set(self.initial_places) | set(self.reduced_places))
        if overlap:
            raise LinearSystemError(f"fresh variables collide with places: {sorted(overlap)}")
        for c in self.constraints:
            missing = c.variables - declared
            if missing:
                raise LinearSystemError(f"undeclared variables in {c}: {sorted(missing)}")

    @classmethod
    def build(
        cls,
        constraints: Iterable[Constraint],
        initial_places: Sequence[str],
        reduced_places: Sequence[str],
    ) -> "LinearSystem":
        """Declare every non-place variable as fresh, in order of appearance."""
        cs = tuple(constraints)
        places = set(initial_places) | set(reduced_places)
        fresh: Dict[str, None] = {}
        for c in cs:
            for v in list(c.lhs.variables) + list(c.rhs.variables):
                if v not in places:
                    fresh.setdefault(v)
        return cls(cs, tuple(initial_places), tuple(reduced_places), tuple(fresh))

    @classmethod
    def identity(cls, places: Sequence[str]) -> "LinearSystem":
        return cls((), tuple(places), tuple(places), ())

    @property
    def variables(self) -> Tuple[str, ...]:
        return tuple(dict.fromkeys(self.initial_places + self.reduced_places + self.fresh))

    @property
    def shared_places(self) -> Tuple[str, ...]:
        reduced = set(self.reduced_places)
        return tuple(p for p in self.initial_places if p in reduced)

    @property
    def erased_places(self) -> Tuple[str, ...]:
        """Places of N1 that N2 no longer has."""
        reduced = set(self.reduced_places)
        return tuple(p for p in self.initial_places if p not in reduced)

    def rows(self) -> List[Row]:
        return [c.row() for c in self.constraints]

    def as_formula(self) -> Formula:
        return conj(*(c.as_formula() for c in self.constraints))

    def render(self) -> str:
        return "\n".join(c.render() for c in self.constraints)

    def __str__(self) -> str:
        return self.render()


# -----------------------------
# Text format: one constraint per line
# -----------------------------

_LINE = re.compile(r"^(?P<lhs>.+?)\s*(?P<op><=|=)\s*(?P<rhs>.+)$")


def parse_constraint(text: str, *, line: int = 0) -> Constraint:
    m = _LINE.match(text.strip())
    if m is None:
        raise ParseError(f"expected `lhs = rhs` or `lhs <= rhs`, got {text.strip()!r}", line, 1)
    op = Comparator.LE if m.group("op") == "<=" else Comparator.EQ
    return Constraint(parse_linexpr(m.group("lhs"), line=line), op, parse_linexpr(m.group("rhs"), line=line))


def parse_system(text: str, initial_places: Sequence[str], reduced_places: Sequence[str]) -> LinearSystem:
    constraints = []
    for i, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if body:
            constraints.append(parse_constraint(body, line=i))
    return LinearSystem.build(constraints, initial_places, reduced_places)


__all__ = [
    "Constraint",
    "LinearSystem",
    "at_most",
    "equation",
    "parse_constraint",
    "parse_system",
]
