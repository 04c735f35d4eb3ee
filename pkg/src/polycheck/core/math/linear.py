from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Dict, Iterable, Mapping, Optional, Tuple, Union

from polycheck.domain.exceptions import ParseError, UnboundVariableError

Number = int
ExprLike = Union["LinExpr", int, str]


@dataclass(frozen=True)
class LinExpr:
    """
    Integer linear expression: sum(coeff * var) + const.
    Terms are kept sorted by variable name with zero coefficients dropped,
    so structurally equal expressions compare and hash equal.
    """
    terms: Tuple[Tuple[str, int], ...] = ()
    const: int = 0

    def __post_init__(self) -> None:
        acc: Dict[str, int] = {}
        for v, c in self.terms:
            acc[v] = acc.get(v, 0) + int(c)
        object.__setattr__(self, "terms", tuple(sorted((v, c) for v, c in acc.items() if c)))
        object.__setattr__(self, "const", int(self.const))

    # -----------------------
    # Constructors
    # -----------------------
    @classmethod
    def var(cls, name: str, coeff: int = 1) -> "LinExpr":
        return cls(((name, coeff),))

    @classmethod
    def constant(cls, k: int) -> "LinExpr":
        return cls((), k)

    @classmethod
    def of(cls, value: ExprLike) -> "LinExpr":
        if isinstance(value, LinExpr):
            return value
        if isinstance(value, bool):
            raise TypeError("booleans are not linear expressions")
        if isinstance(value, int):
            return cls.constant(value)
        if isinstance(value, str):
            return cls.var(value)
        raise TypeError(f"cannot build a linear expression from {type(value).__name__}")

    @classmethod
    def sum_of(cls, names: Iterable[str]) -> "LinExpr":
        return cls(tuple((n, 1) for n in names))

    # -----------------------
    # Algebra
    # -----------------------
    def __add__(self, other: ExprLike) -> "LinExpr":
        o = LinExpr.of(other)
        return LinExpr(self.terms + o.terms, self.const + o.const)

    __radd__ = __add__

    def __neg__(self) -> "LinExpr":
        return LinExpr(tuple((v, -c) for v, c in self.terms), -self.const)

    def __sub__(self, other: ExprLike) -> "LinExpr":
        return self + (-LinExpr.of(other))

    def __rsub__(self, other: ExprLike) -> "LinExpr":
        return LinExpr.of(other) - self

    def scale(self, k: int) -> "LinExpr":
        return LinExpr(tuple((v, c * k) for v, c in self.terms), self.const * k)

    def coeff(self, name: str) -> int:
        for v, c in self.terms:
            if v == name:
                return c
        return 0

    def without_const(self) -> "LinExpr":
        return LinExpr(self.terms, 0)

    @property
    def variables(self) -> Tuple[str, ...]:
        return tuple(v for v, _ in self.terms)

    @property
    def is_constant(self) -> bool:
        return not self.terms

    def evaluate(self, env: Mapping[str, int]) -> int:
        total = self.const
        for v, c in self.terms:
            if v not in env:
                raise UnboundVariableError(v)
            total += c * int(env[v])
        return total

    def substitute(self, env: Mapping[str, "LinExpr"]) -> "LinExpr":
        out = LinExpr.constant(self.const)
        for v, c in self.terms:
            out = out + (env[v].scale(c) if v in env else LinExpr.var(v, c))
        return out

    def partial(self, values: Mapping[str, int]) -> "LinExpr":
        """Replace the variables found in values by their integers."""
        const = self.const
        kept = []
        for v, c in self.terms:
            if v in values:
                const += c * int(values[v])
            else:
                kept.append((v, c))
        return LinExpr(tuple(kept), const)

    def rename(self, mapping: Mapping[str, str]) -> "LinExpr":
        return LinExpr(tuple((mapping.get(v, v), c) for v, c in self.terms), self.const)

    # -----------------------
    # Text
    # -----------------------
    def render(self) -> str:
        parts = []
        for v, c in self.terms:
            mag = abs(c)
            body = v if mag == 1 else f"{mag}*{v}"
            parts.append(("-" if c < 0 else "+", body))
        if self.const or not parts:
            parts.append(("-" if self.const < 0 else "+", str(abs(self.const))))
        sign, first = parts[0]
        out = ("-" if sign == "-" else "") + first
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out

    def __str__(self) -> str:
        return self.render()


# -----------------------------
# Parsing
# -----------------------------

IDENT = r"(?:\{(?:[^}\\]|\\.)*\}|[A-Za-z_][A-Za-z0-9_'.@]*)"
_TERM = re.compile(rf"\s*([+-])?\s*(?:(\d+)\s*\*?\s*)?({IDENT})?\s*")


def unbrace(token: str) -> str:
    if token.startswith("{") and token.endswith("}"):
        return re.sub(r"\\(.)", r"\1", token[1:-1])
    return token


def parse_linexpr(text: str, *, line: int = 0) -> LinExpr:
    """Parse `3*p + q - 2` style text (the `*` may be omitted after a number)."""
    pos = 0
    out = LinExpr()
    first = True
    src = text.strip()
    if not src:
        raise ParseError("empty linear expression", line, 1)
    while pos < len(src):
        m = _TERM.match(src, pos)
        if m is None or m.end() == pos:
            raise ParseError(f"unexpected {src[pos:]!r} in linear expression", line, pos + 1)
        sign, num, ident = m.groups()
        if sign is None and not first:
            raise ParseError("missing operator in linear expression", line, pos + 1)
        if num is None and ident is None:
            raise ParseError("dangling sign in linear expression", line, pos + 1)
        k = int(num) if num is not None else 1
        if sign == "-":
            k = -k
        out = out + (LinExpr.var(unbrace(ident), k) if ident is not None else LinExpr.constant(k))
        pos = m.end()
        first = False
    return out
