"""
TINA `.net` textual format (P/T subset).

    net <name>
    tr <name> [: <label>] <place>[*k] ... -> <place>[*k] ...
    pl <name> [: <label>] [(<tokens>)] [<tr>[*k] ... -> <tr>[*k] ...]

Identifiers are plain words or `{braced}` text; `#` starts a comment; token
counts and weights accept the K and M suffixes. Nodes appear in the order they
are first mentioned and the label `tau` marks a silent transition. Read arcs,
inhibitor arcs and time intervals are rejected.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Set, Tuple

from polycheck.domain.exceptions import NetError, ParseError
from polycheck.domain.models import Marking, PetriNet

_TOKEN = re.compile(
    r"""
     (?P<ws>\s+)
    |(?P<comment>\#.*)
    |(?P<brace>\{(?:[^{}\\]|\\.)*\})
    |(?P<arrow>->)
    |(?P<colon>:)
    |(?P<tokens>\(\s*\d+\s*[KM]?\s*\))
    |(?P<interval>[\[\]])
    |(?P<weight>\*\s*\d+[KM]?)
    |(?P<special>\?-?\d*[KM]?)
    |(?P<word>[A-Za-z0-9_.'@$%&!^~+/]+)
    """,
    re.VERBOSE,
)
_PLAIN = re.compile(r"^[A-Za-z0-9_.'@$%&!^~+/]+$")
_SCALE = {"": 1, "K": 1_000, "M": 1_000_000}


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    col: int


def _number(text: str, line: int, col: int) -> int:
    m = re.fullmatch(r"\s*(\d+)\s*([KM]?)\s*", text)
    if m is None:
        raise ParseError(f"bad number {text!r}", line, col)
    return int(m.group(1)) * _SCALE[m.group(2)]


def _unbrace(text: str) -> str:
    if text.startswith("{"):
        return re.sub(r"\\(.)", r"\1", text[1:-1])
    return text


def _scan(line: str, lineno: int) -> List[_Tok]:
    out: List[_Tok] = []
    pos = 0
    while pos < len(line):
        m = _TOKEN.match(line, pos)
        if m is None:
            raise ParseError(f"unexpected character {line[pos]!r}", lineno, pos + 1)
        kind = m.lastgroup or ""
        if kind == "comment":
            break
        if kind != "ws":
            out.append(_Tok(kind, m.group(), pos + 1))
        pos = m.end()
    return out


class _Builder:
    def __init__(self) -> None:
        self.name = "net"
        self.places: Dict[str, int] = {}
        self.transitions: Dict[str, None] = {}
        self.pre: Dict[str, Dict[str, int]] = {}
        self.post: Dict[str, Dict[str, int]] = {}
        self.labels: Dict[str, str] = {}
        self.declared: Set[str] = set()

    def place(self, p: str) -> None:
        self.places.setdefault(p, 0)

    def transition(self, t: str) -> None:
        if t not in self.transitions:
            self.transitions[t] = None
            self.pre[t] = {}
            self.post[t] = {}

    def arc(self, table: Dict[str, Dict[str, int]], t: str, p: str, w: int) -> None:
        self.transition(t)
        self.place(p)
        table[t][p] = table[t].get(p, 0) + w

    def build(self) -> Tuple[PetriNet, Marking]:
        try:
            net = PetriNet(
                places=tuple(self.places),
                transitions=tuple(self.transitions),
                pre=self.pre,
                post=self.post,
                labels=self.labels,
                name=self.name,
            )
        except NetError as exc:
            raise ParseError(str(exc)) from exc
        return net, Marking.of(self.places)


class _Line:
    def __init__(self, toks: List[_Tok], lineno: int):
        self.toks = toks
        self.i = 0
        self.lineno = lineno

    def peek(self) -> Optional[_Tok]:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self) -> _Tok:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of line", self.lineno, 0)
        self.i += 1
        return tok

    def ident(self, what: str) -> str:
        tok = self.take()
        if tok.kind not in ("word", "brace"):
            raise ParseError(f"expected {what}, got {tok.text!r}", self.lineno, tok.col)
        return _unbrace(tok.text)

    def optional_label(self) -> Optional[str]:
        tok = self.peek()
        if tok is not None and tok.kind == "colon":
            self.take()
            return self.ident("label")
        return None

    def arcs(self, stop_at_arrow: bool) -> Iterator[Tuple[str, int]]:
        while True:
            tok = self.peek()
            if tok is None or (stop_at_arrow and tok.kind == "arrow"):
                return
            if tok.kind == "interval":
                raise ParseError("time intervals are not supported", self.lineno, tok.col)
            name = self.ident("node name")
            w = 1
            nxt = self.peek()
            if nxt is not None and nxt.kind == "weight":
                self.take()
                w = _number(nxt.text[1:], self.lineno, nxt.col)
            elif nxt is not None and nxt.kind == "special":
                raise ParseError("read and inhibitor arcs are not supported", self.lineno, nxt.col)
            yield name, w

    def arrow(self) -> None:
        tok = self.take()
        if tok.kind != "arrow":
            raise ParseError(f"expected '->', got {tok.text!r}", self.lineno, tok.col)


def parse_net(text: str) -> Tuple[PetriNet, Marking]:
    b = _Builder()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        toks = _scan(raw, lineno)
        if not toks:
            continue
        ln = _Line(toks, lineno)
        head = ln.take()
        if head.kind != "word":
            raise ParseError(f"expected a declaration, got {head.text!r}", lineno, head.col)
        kw = head.text
        if kw == "net":
            b.name = ln.ident("net name")
        elif kw == "tr":
            t = ln.ident("transition name")
            if t in b.declared:
                raise ParseError(f"transition {t!r} declared twice", lineno, head.col)
            b.declared.add(t)
            b.transition(t)
            label = ln.optional_label()
            if label is not None:
                b.labels[t] = label
            for p, w in ln.arcs(stop_at_arrow=True):
                b.arc(b.pre, t, p, w)
            ln.arrow()
            for p, w in ln.arcs(stop_at_arrow=False):
                b.arc(b.post, t, p, w)
        elif kw == "pl":
            p = ln.ident("place name")
            b.place(p)
            ln.optional_label()
            tok = ln.peek()
            if tok is not None and tok.kind == "tokens":
                ln.take()
                b.places[p] = _number(tok.text.strip()[1:-1], lineno, tok.col)
            if ln.peek() is not None:
                for t, w in ln.arcs(stop_at_arrow=True):
                    b.arc(b.post, t, p, w)
                ln.arrow()
                for t, w in ln.arcs(stop_at_arrow=False):
                    b.arc(b.pre, t, p, w)
        elif kw in ("lb", "pr", "nt", "note"):
            raise ParseError(f"unsupported declaration {kw!r}", lineno, head.col)
        else:
            raise ParseError(f"unknown declaration {kw!r}", lineno, head.col)
        rest = ln.peek()
        if rest is not None:
            raise ParseError(f"trailing input {rest.text!r}", lineno, rest.col)
    return b.build()


# -----------------------------
# Printing
# -----------------------------

def quote(name: str) -> str:
    if _PLAIN.match(name) and name not in ("net", "tr", "pl"):
        return name
    return "{" + re.sub(r"([{}\\])", r"\\\1", name) + "}"


def _arc_list(row) -> str:
    return " ".join(quote(p) if w == 1 else f"{quote(p)}*{w}" for p, w in row)


def print_net(net: PetriNet, m0: Optional[Marking] = None) -> str:
    """Render net in the format parse_net reads; parse_net(print_net(n, m)) == (n, m)."""
    m0 = m0 or Marking()
    lines = [f"net {quote(net.name)}"]
    for p in net.places:
        lines.append(f"pl {quote(p)}" + (f" ({m0[p]})" if m0[p] else ""))
    for t in net.transitions:
        label = net.labels[t]
        head = f"tr {quote(t)}" + (f" : {quote(label)}" if label != t else "")
        pre = [(p, net.pre[t][p]) for p in net.places if p in net.pre[t]]
        post = [(p, net.post[t][p]) for p in net.places if p in net.post[t]]
        lines.append(" ".join(s for s in (head, _arc_list(pre), "->", _arc_list(post)) if s))
    return "\n".join(lines) + "\n"


__all__ = ["parse_net", "print_net", "quote"]
