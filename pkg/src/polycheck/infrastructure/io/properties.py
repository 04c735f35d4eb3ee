"""
Textual reachability properties.

    property   := ("EF" | "AG") formula
    formula    := conj (("or" | "|" | "||") conj)*
    conj       := unary (("and" | "&" | "&&") unary)*
    unary      := ("not" | "!") unary | "(" formula ")" | "true" | "false"
                | "deadlock" | "bounded" "(" int ")"
                | "enabled" "(" name ("," name)* ")" | expr cmp expr
    expr       := term (("+" | "-") term)*
    term       := factor ("*" factor)*          (at most one non-constant factor)
    factor     := int | name | "(" expr ")" | "-" factor
    cmp        := "<" | "<=" | ">" | ">=" | "=" | "==" | "!="

Names are places (transitions inside enabled()); names that are not plain
identifiers are written in braces. A property file holds one property per
line, optionally prefixed by `name:`; `#` starts a comment line.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import List, Optional, Tuple

from polycheck.core.logic.formula import FALSE, TRUE, Formula, atom, conj, disj, negate
from polycheck.core.logic.predicates import bounded_predicate, dead_predicate, enabled_predicate
from polycheck.core.math.linear import LinExpr
from polycheck.domain.enums import Quantifier
from polycheck.domain.exceptions import ParseError
from polycheck.domain.models import PetriNet

_TOKEN = re.compile(
    r"""
     (?P<ws>\s+)
    |(?P<int>\d+)
    |(?P<brace>\{(?:[^{}\\]|\\.)*\})
    |(?P<word>[A-Za-z_][A-Za-z0-9_.']*)
    |(?P<op><=|>=|==|!=|&&|\|\||[<>=()!,+\-*&|])
    """,
    re.VERBOSE,
)
_CMP = ("<", "<=", ">", ">=", "=", "==", "!=")
_OR = ("or", "|", "||")
_AND = ("and", "&", "&&")
_NOT = ("not", "!")
_NAMED = re.compile(r"^\s*(?P<name>[A-Za-z_][\w.\-]*)\s*:\s*(?P<body>.*)$")


@dataclass(frozen=True)
class NamedQuery:
    name: str
    quantifier: Quantifier
    formula: Formula
    text: str


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    col: int

    @property
    def value(self) -> str:
        if self.kind == "brace":
            return re.sub(r"\\(.)", r"\1", self.text[1:-1])
        return self.text


def _scan(text: str, line: int) -> List[_Tok]:
    out: List[_Tok] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos + 1)
        if m.lastgroup != "ws":
            out.append(_Tok(m.lastgroup or "", m.group(), pos + 1))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, text: str, net: Optional[PetriNet], line: int = 1, offset: int = 0):
        self.toks = _scan(text, line)
        self.net = net
        self.line = line
        self.offset = offset
        self.i = 0
        self.end_col = len(text) + 1

    # -----------------------
    # Token helpers
    # -----------------------
    def error(self, message: str, tok: Optional[_Tok] = None) -> ParseError:
        col = tok.col if tok is not None else self.end_col
        return ParseError(message, self.line, col + self.offset)

    def peek(self) -> Optional[_Tok]:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def at(self, *texts: str) -> bool:
        tok = self.peek()
        return tok is not None and tok.kind in ("op", "word") and tok.text in texts

    def take(self) -> _Tok:
        tok = self.peek()
        if tok is None:
            raise self.error("unexpected end of property")
        self.i += 1
        return tok

    def expect(self, text: str) -> _Tok:
        tok = self.take()
        if tok.text != text:
            raise self.error(f"expected {text!r}, got {tok.text!r}", tok)
        return tok

    # -----------------------
    # Grammar
    # -----------------------
    def query(self) -> Tuple[Quantifier, Formula]:
        tok = self.take()
        if tok.kind != "word" or tok.text not in ("EF", "AG"):
            raise self.error(f"expected EF or AG, got {tok.text!r}", tok)
        f = self.formula()
        rest = self.peek()
        if rest is not None:
            raise self.error(f"trailing input {rest.text!r}", rest)
        return Quantifier(tok.text), f

    def formula(self) -> Formula:
        parts = [self.conjunction()]
        while self.at(*_OR):
            self.take()
            parts.append(self.conjunction())
        return disj(*parts)

    def conjunction(self) -> Formula:
        parts = [self.unary()]
        while self.at(*_AND):
            self.take()
            parts.append(self.unary())
        return conj(*parts)

    def unary(self) -> Formula:
        if self.at(*_NOT):
            self.take()
            return negate(self.unary())
        if self.at("("):
            mark = self.i
            try:
                return self.comparison()
            except ParseError:
                self.i = mark
            self.take()
            f = self.formula()
            self.expect(")")
            return f
        if self.at("true"):
            self.take()
            return TRUE
        if self.at("false"):
            self.take()
            return FALSE
        if self.at("deadlock"):
            tok = self.take()
            return dead_predicate(self._net(tok))
        if self.at("bounded"):
            return self.bounded()
        if self.at("enabled"):
            return self.enabled()
        return self.comparison()

    def bounded(self) -> Formula:
        tok = self.take()
        net = self._net(tok)
        self.expect("(")
        k = self.take()
        if k.kind != "int":
            raise self.error(f"expected a token bound, got {k.text!r}", k)
        self.expect(")")
        return bounded_predicate(net, int(k.text))

    def enabled(self) -> Formula:
        tok = self.take()
        net = self._net(tok)
        self.expect("(")
        names = [self.name("transition")]
        while self.at(","):
            self.take()
            names.append(self.name("transition"))
        self.expect(")")
        for n, t in names:
            if t not in net.transitions:
                raise self.error(f"unknown transition {t!r}", n)
        return disj(*(enabled_predicate(net, t) for _, t in names))

    def comparison(self) -> Formula:
        lhs = self.expr()
        tok = self.take()
        if tok.kind != "op" or tok.text not in _CMP:
            raise self.error(f"expected a comparison, got {tok.text!r}", tok)
        rhs = self.expr()
        return atom(lhs, tok.text, rhs)

    def expr(self) -> LinExpr:
        e = self.term()
        while self.at("+", "-"):
            op = self.take().text
            t = self.term()
            e = e + t if op == "+" else e - t
        return e

    def term(self) -> LinExpr:
        start = self.peek()
        e = self.factor()
        while self.at("*"):
            self.take()
            f = self.factor()
            if e.is_constant:
                e = f.scale(e.const)
            elif f.is_constant:
                e = e.scale(f.const)
            else:
                raise self.error("product of two variables is not linear", start)
        return e

    def factor(self) -> LinExpr:
        tok = self.peek()
        if tok is None:
            raise self.error("expected an expression")
        if tok.kind == "int":
            self.take()
            return LinExpr.constant(int(tok.text))
        if self.at("-"):
            self.take()
            return -self.factor()
        if self.at("("):
            self.take()
            e = self.expr()
            self.expect(")")
            return e
        tok, name = self.name("place")
        if self.net is not None and name not in self.net.places:
            raise self.error(f"unknown place {name!r}", tok)
        return LinExpr.var(name)

    def name(self, what: str) -> Tuple[_Tok, str]:
        tok = self.take()
        if tok.kind not in ("word", "brace"):
            raise self.error(f"expected a {what} name, got {tok.text!r}", tok)
        return tok, tok.value

    def _net(self, tok: _Tok) -> PetriNet:
        if self.net is None:
            raise self.error(f"{tok.text!r} needs a net", tok)
        return self.net


_KEYWORDS = frozenset({"EF", "AG", "true", "false", "deadlock", "bounded", "enabled", *_OR, *_AND, *_NOT})
_PLAIN_NAME = re.compile(r"^[A-Za-z_][A-Za-z0-9_.']*$")


def quote_name(name: str) -> str:
    """Spell a place or transition name so the property tokenizer reads it back."""
    if _PLAIN_NAME.match(name) and name not in _KEYWORDS:
        return name
    return "{" + re.sub(r"([{}\\])", r"\\\1", name) + "}"


def parse_property(text: str, net: Optional[PetriNet] = None, *, line: int = 1) -> Tuple[Quantifier, Formula]:
    """Parse `EF f` or `AG f`; with a net, names are checked against its places and transitions."""
    return _Parser(text, net, line).query()


def parse_properties(text: str, net: Optional[PetriNet] = None) -> List[NamedQuery]:
    out: List[NamedQuery] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.strip()
        if not body or body.startswith("#"):
            continue
        name = f"q{len(out) + 1}"
        offset = len(raw) - len(raw.lstrip())
        m = _NAMED.match(raw)
        if m is not None:
            name = m.group("name")
            offset = m.start("body")
            body = m.group("body").strip()
        quantifier, formula = _Parser(body, net, lineno, offset).query()
        out.append(NamedQuery(name, quantifier, formula, body))
    return out


__all__ = ["NamedQuery", "parse_properties", "parse_property", "quote_name"]
