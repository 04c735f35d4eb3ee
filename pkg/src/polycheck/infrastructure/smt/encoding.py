"""
QF-LIA encoding of net semantics and SMT-LIB text emission.

Terms are plain Formula objects over generation-indexed variables
`x<g>_<place>`. Every generation is asserted nonnegative wherever it is
introduced.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from polycheck.core.logic.formula import (
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
    negate,
    rename,
)
from polycheck.core.logic.predicates import cover_predicate, enabled_predicate, marking_cube
from polycheck.core.math.linear import LinExpr
from polycheck.core.net.firing import fire, incidence, is_enabled
from polycheck.domain.exceptions import EncodingError
from polycheck.domain.models import Marking, PetriNet


# -----------------------------
# Variables
# -----------------------------

@dataclass(frozen=True)
class VarVec:
    """One solver variable per place, for a single generation."""
    generation: int
    places: Tuple[str, ...]
    names: Tuple[str, ...]

    @property
    def mapping(self) -> Dict[str, str]:
        return dict(zip(self.places, self.names))

    def __getitem__(self, place: str) -> str:
        return self.names[self.places.index(place)]

    def __iter__(self) -> Iterator[str]:
        return iter(self.names)

    def __len__(self) -> int:
        return len(self.names)


class GenerationCounter:
    """Hands out disjoint VarVecs x0, x1, ... for a fixed place list."""

    def __init__(self, places: Sequence[str], prefix: str = "x"):
        self.places = tuple(places)
        self.prefix = prefix
        self._next = 0

    @property
    def issued(self) -> int:
        return self._next

    def fresh_generation(self) -> VarVec:
        g = self._next
        self._next += 1
        return VarVec(g, self.places, tuple(f"{self.prefix}{g}_{p}" for p in self.places))


# -----------------------------
# Net semantics
# -----------------------------

def nonnegativity(x: VarVec) -> Formula:
    return conj(*(atom(LinExpr.var(n), ">=", 0) for n in x.names))


def initial_cube(m0: Mapping[str, int], x: VarVec) -> Formula:
    return marking_cube(m0, x.places, x.mapping)


def cover_cube(m: Mapping[str, int], x: VarVec) -> Formula:
    return cover_predicate(m, x.places, x.mapping)


def stutter(x: VarVec, x1: VarVec) -> Formula:
    """EQ(x, x'): nothing fires."""
    return conj(*(atom(LinExpr.var(a), "=", LinExpr.var(b)) for a, b in zip(x.names, x1.names)))


def delta(net: PetriNet, t: str, x: VarVec, x1: VarVec) -> Formula:
    """x'_p = x_p + Post(t, p) - Pre(t, p) for every place."""
    eff = incidence(net, t)
    return conj(
        *(atom(LinExpr.var(x1[p]), "=", LinExpr.var(x[p]) + eff.get(p, 0)) for p in net.places)
    )


def encode_fire(net: PetriNet, t: str, x: VarVec, x1: VarVec) -> Formula:
    return conj(enabled_predicate(net, t, x.mapping), delta(net, t, x, x1))


def encode_transition_relation(net: PetriNet, x: VarVec, x1: VarVec) -> Formula:
    """T(x, x') = EQ(x, x') or some enabled transition fires."""
    if len(x) != len(net.places) or len(x1) != len(net.places):
        raise EncodingError("variable vectors do not match the place count")
    return disj(stutter(x, x1), *(encode_fire(net, t, x, x1) for t in net.transitions))


def unroll(
    net: PetriNet,
    m0: Mapping[str, int],
    k: int,
    counter: Optional[GenerationCounter] = None,
) -> Tuple[Formula, List[VarVec]]:
    counter = counter or GenerationCounter(net.places)
    gens = [counter.fresh_generation()]
    parts = [nonnegativity(gens[0]), initial_cube(m0, gens[0])]
    for _ in range(k):
        nxt = counter.fresh_generation()
        parts.append(nonnegativity(nxt))
        parts.append(encode_transition_relation(net, gens[-1], nxt))
        gens.append(nxt)
    return conj(*parts), gens


def at_generation(f: Formula, x: VarVec) -> Formula:
    """Read a place formula at one generation."""
    return rename(f, x.mapping)


def distinct_generations(x: VarVec, y: VarVec) -> Formula:
    return disj(*(negate(atom(LinExpr.var(a), "=", LinExpr.var(b))) for a, b in zip(x.names, y.names)))


def pairwise_distinct(gens: Sequence[VarVec]) -> Formula:
    return conj(*(distinct_generations(a, b) for i, a in enumerate(gens) for b in gens[i + 1:]))


# -----------------------------
# Decoding
# -----------------------------

def decode_marking(model: Mapping[str, int], x: VarVec) -> Marking:
    return Marking.of({p: int(model.get(n, 0)) for p, n in zip(x.places, x.names)})


def decode_step(net: PetriNet, m: Marking, m1: Marking) -> Optional[str]:
    """The first transition leading from m to m1 (None when m == m1)."""
    if m == m1:
        return None
    for t in net.transitions:
        if is_enabled(net, m, t) and fire(net, m, t) == m1:
            return t
    raise EncodingError(f"no transition leads from {m.render()} to {m1.render()}")


# -----------------------------
# Quantifiers
# -----------------------------

def skolemize(f: Formula, fresh: Callable[[str], str]) -> Tuple[Formula, Tuple[str, ...]]:
    """
    Replace positively occurring existential blocks by fresh constants.
    A negated existential has no QF-LIA rendering and is rejected.
    """
    introduced: List[str] = []

    def walk(g: Formula) -> Formula:
        if isinstance(g, (Const, Atom)):
            return g
        if isinstance(g, And):
            return conj(*(walk(a) for a in g.args))
        if isinstance(g, Or):
            return disj(*(walk(a) for a in g.args))
        if isinstance(g, Exists):
            mapping = {v: fresh(v) for v in g.variables}
            introduced.extend(mapping.values())
            return walk(rename(g.body, mapping))
        if isinstance(g, Not):
            raise EncodingError("negated existential block cannot be emitted in QF_LIA")
        raise EncodingError(f"not a formula: {g!r}")

    return walk(f), tuple(introduced)


# -----------------------------
# SMT-LIB text
# -----------------------------

_SIMPLE = re.compile(r"^[A-Za-z~!@$%^&*_+=<>.?/\-][A-Za-z0-9~!@$%^&*_+=<>.?/\-]*$")
_RESERVED = frozenset(
    {"par", "NUMERAL", "DECIMAL", "STRING", "_", "!", "as", "let", "exists", "forall", "match",
     "true", "false", "and", "or", "not", "assert", "ite", "distinct"}
)


def symbol(name: str) -> str:
    if _SIMPLE.match(name) and name not in _RESERVED:
        return name
    if "|" in name or "\\" in name:
        raise EncodingError(f"identifier {name!r} cannot be quoted as an SMT-LIB symbol")
    return f"|{name}|"


def _sum(terms: Sequence[Tuple[str, int]], const: int) -> str:
    parts = [symbol(v) if k == 1 else f"(* {k} {symbol(v)})" for v, k in terms]
    if const:
        parts.append(str(const))
    if not parts:
        return "0"
    if len(parts) == 1:
        return parts[0]
    return "(+ " + " ".join(parts) + ")"


def _atom_text(a: Atom) -> str:
    pos = [(v, k) for v, k in a.expr.terms if k > 0]
    neg = [(v, -k) for v, k in a.expr.terms if k < 0]
    left_const = -a.bound if a.bound < 0 else 0
    right_const = a.bound if a.bound > 0 else 0
    return f"({a.op.value} {_sum(pos, left_const)} {_sum(neg, right_const)})"


def term_text(f: Formula) -> str:
    if isinstance(f, Const):
        return "true" if f.value else "false"
    if isinstance(f, Atom):
        return _atom_text(f)
    if isinstance(f, And):
        return "(and " + " ".join(term_text(a) for a in f.args) + ")"
    if isinstance(f, Or):
        return "(or " + " ".join(term_text(a) for a in f.args) + ")"
    if isinstance(f, (Exists, Not)):
        raise EncodingError("quantified terms must be skolemized before emission")
    raise EncodingError(f"not a formula: {f!r}")


@dataclass(frozen=True)
class SetLogic:
    logic: str = "QF_LIA"

    def render(self) -> str:
        return f"(set-logic {self.logic})"


@dataclass(frozen=True)
class SetOption:
    name: str
    value: Union[str, int, bool]

    def render(self) -> str:
        v = self.value
        text = ("true" if v else "false") if isinstance(v, bool) else str(v)
        return f"(set-option :{self.name} {text})"


@dataclass(frozen=True)
class DeclareConst:
    name: str
    sort: str = "Int"

    def render(self) -> str:
        return f"(declare-const {symbol(self.name)} {self.sort})"


@dataclass(frozen=True)
class Assert:
    term: Formula
    label: Optional[str] = None

    def render(self) -> str:
        body = term_text(self.term)
        if self.label is None:
            return f"(assert {body})"
        return f"(assert (! {body} :named {symbol(self.label)}))"


@dataclass(frozen=True)
class CheckSat:
    def render(self) -> str:
        return "(check-sat)"


@dataclass(frozen=True)
class GetValue:
    names: Tuple[str, ...]

    def render(self) -> str:
        return "(get-value (" + " ".join(symbol(n) for n in self.names) + "))"


@dataclass(frozen=True)
class GetUnsatCore:
    def render(self) -> str:
        return "(get-unsat-core)"


@dataclass(frozen=True)
class GetInfo:
    key: str

    def render(self) -> str:
        return f"(get-info :{self.key})"


@dataclass(frozen=True)
class Push:
    n: int = 1

    def render(self) -> str:
        return f"(push {self.n})"


@dataclass(frozen=True)
class Pop:
    n: int = 1

    def render(self) -> str:
        return f"(pop {self.n})"


@dataclass(frozen=True)
class Echo:
    text: str

    def render(self) -> str:
        return f'(echo "{self.text}")'


Command = Union[SetLogic, SetOption, DeclareConst, Assert, CheckSat, GetValue, GetUnsatCore, GetInfo, Push, Pop, Echo]


def serialize(item: Union[Formula, Command]) -> str:
    if isinstance(item, Formula):
        return term_text(item)
    return item.render()


def script(commands: Iterable[Command]) -> str:
    """One command per line; constants must be declared before the assertions using them."""
    return "".join(serialize(c) + "\n" for c in commands)


__all__ = [
    "Assert",
    "CheckSat",
    "Command",
    "DeclareConst",
    "Echo",
    "GenerationCounter",
    "GetInfo",
    "GetUnsatCore",
    "GetValue",
    "Pop",
    "Push",
    "SetLogic",
    "SetOption",
    "VarVec",
    "at_generation",
    "cover_cube",
    "decode_marking",
    "decode_step",
    "delta",
    "distinct_generations",
    "encode_fire",
    "encode_transition_relation",
    "initial_cube",
    "nonnegativity",
    "pairwise_distinct",
    "script",
    "serialize",
    "skolemize",
    "stutter",
    "symbol",
    "term_text",
    "unroll",
]
