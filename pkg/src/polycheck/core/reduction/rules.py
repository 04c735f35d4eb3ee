"""
Structural reduction rules.

Every matcher takes the current (net, marking) and returns the first
ReductionStep it can apply, or None. Matching is deterministic: candidates
are scanned in declaration order. Fresh places are placed first in the
resulting place order.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from polycheck.core.abstraction.system import Constraint, at_most, equation
from polycheck.core.math.linear import LinExpr
from polycheck.domain.enums import RuleId
from polycheck.domain.models import Marking, PetriNet


class FreshNames:
    """Hands out a1, a2, ... skipping every name already in use."""

    def __init__(self, taken: Iterable[str], prefix: str = "a"):
        self._taken = set(taken)
        self._prefix = prefix
        self._n = 0

    def next(self) -> str:
        while True:
            self._n += 1
            name = f"{self._prefix}{self._n}"
            if name not in self._taken:
                self._taken.add(name)
                return name


@dataclass(frozen=True)
class ReductionStep:
    rule: RuleId
    matched: Mapping[str, str]
    equations: Tuple[Constraint, ...]
    fresh_vars: Tuple[str, ...]
    net_before: PetriNet
    marking_before: Marking
    net_after: PetriNet
    marking_after: Marking
    # fresh place -> places of net_before whose tokens it holds
    merged: Mapping[str, Tuple[str, ...]] = field(default_factory=dict)

    def apply_marking(self, m: Mapping[str, int]) -> Marking:
        kept = {p: m.get(p, 0) for p in self.net_after.places if p not in self.merged}
        for x, sources in self.merged.items():
            kept[x] = sum(m.get(s, 0) for s in sources)
        return Marking.of(kept)

    @property
    def removed_places(self) -> Tuple[str, ...]:
        after = set(self.net_after.places)
        return tuple(p for p in self.net_before.places if p not in after)

    @property
    def removed_transitions(self) -> Tuple[str, ...]:
        after = set(self.net_after.transitions)
        return tuple(t for t in self.net_before.transitions if t not in after)

    def describe(self) -> str:
        eqs = "; ".join(c.render() for c in self.equations) or "no equation"
        binds = ", ".join(f"{k}={v}" for k, v in self.matched.items())
        return f"[{self.rule.value}] {binds}: {eqs}"


Matcher = Callable[[PetriNet, Marking, FreshNames], Optional[ReductionStep]]


# -----------------------------
# Helpers
# -----------------------------

def _step(
    rule: RuleId,
    matched: Mapping[str, str],
    equations: Sequence[Constraint],
    net: PetriNet,
    m: Marking,
    after: PetriNet,
    *,
    fresh: Sequence[str] = (),
    merged: Optional[Mapping[str, Tuple[str, ...]]] = None,
) -> ReductionStep:
    step = ReductionStep(
        rule=rule,
        matched=dict(matched),
        equations=tuple(equations),
        fresh_vars=tuple(fresh),
        net_before=net,
        marking_before=m,
        net_after=after,
        marking_after=Marking(),
        merged=dict(merged or {}),
    )
    object.__setattr__(step, "marking_after", step.apply_marking(m))
    return step


def _row_key(row: Mapping[str, int]) -> Tuple[Tuple[str, int], ...]:
    return tuple(sorted(row.items()))


def _unit_arcs(net: PetriNet, places: Iterable[str]) -> bool:
    ps = set(places)
    for t in net.transitions:
        for row in (net.pre[t], net.post[t]):
            if any(w != 1 for p, w in row.items() if p in ps):
                return False
    return True


def _fuse(net: PetriNet, sources: Sequence[str], x: str, drop: Iterable[str]) -> PetriNet:
    """Replace sources by one place x (placed first) whose arcs are the sums."""
    gone = set(sources)
    dropped = set(drop)
    transitions = [t for t in net.transitions if t not in dropped]

    def fold(row: Mapping[str, int]) -> Dict[str, int]:
        out = {p: w for p, w in row.items() if p not in gone}
        w = sum(row.get(s, 0) for s in sources)
        if w:
            out[x] = w
        return out

    return net.edited(
        places=[x] + [p for p in net.places if p not in gone],
        transitions=transitions,
        pre={t: fold(net.pre[t]) for t in transitions},
        post={t: fold(net.post[t]) for t in transitions},
    )


def _drop_place(net: PetriNet, p: str, transitions: Iterable[str] = ()) -> PetriNet:
    out = net.without_place(p)
    for t in transitions:
        out = out.without_transition(t)
    return out


def _single(row: Mapping[str, int]) -> Optional[Tuple[str, int]]:
    if len(row) != 1:
        return None
    return next(iter(row.items()))


# -----------------------------
# Transition rules
# -----------------------------

def try_dead_transition(net: PetriNet, m: Marking, names: FreshNames) -> Optional[ReductionStep]:
    """
    [DEADT] If no transition able to fire can ever raise place p above m(p),
    every transition needing more than m(p) tokens of p is dead.
    """
    for p in net.places:
        k = m[p]
        grows = any(
            net.post[u].get(p, 0) > net.pre[u].get(p, 0) and net.pre[u].get(p, 0) <= k
            for u in net.transitions
        )
        if grows:
            continue
        for t in net.transitions:
            if net.pre[t].get(p, 0) > k:
                return _step(RuleId.DEADT, {"place": p, "transition": t}, (), net, m, net.without_transition(t))
    return None


def try_redundant_transition(net: PetriNet, m: Marking, names: FreshNames) -> Optional[ReductionStep]:
    """[REDT] duplicates, silent no-ops, and silent shortcuts of two silent steps."""
    seen: Dict[tuple, str] = {}
    for t in net.transitions:
        key = (_row_key(net.pre[t]), _row_key(net.post[t]), net.labels[t])
        if key in seen:
            return _step(RuleId.REDT, {"transition": t, "duplicate_of": seen[key]}, (), net, m, net.without_transition(t))
        seen[key] = t

    silent = [t for t in net.transitions if net.is_silent(t)]
    for t in silent:
        if dict(net.pre[t]) == dict(net.post[t]):
            return _step(RuleId.REDT, {"transition": t}, (), net, m, net.without_transition(t))

    for t in silent:
        pre_t, post_t = dict(net.pre[t]), dict(net.post[t])
        for t1 in silent:
            if t1 == t or dict(net.pre[t1]) != pre_t:
                continue
            mid = dict(net.post[t1])
            for t2 in silent:
                if t2 == t or dict(net.pre[t2]) != mid or dict(net.post[t2]) != post_t:
                    continue
                matched = {"transition": t, "first": t1, "second": t2}
                return _step(RuleId.REDT, matched, (), net, m, net.without_transition(t))
    return None


# -----------------------------
# Place removal rules
# -----------------------------

def try_constant(net: PetriNet, m: Marking, names: FreshNames) -> Optional[ReductionStep]:
    """[CONSTANT] p is only ever tested (Pre = Post <= m(p)); it keeps m(p) forever."""
    for p in net.places:
        k = m[p]
        if all(net.pre[t].get(p, 0) == net.post[t].get(p, 0) <= k for t in net.transitions):
            return _step(RuleId.CONSTANT, {"place": p}, (equation(p, k),), net, m, _drop_place(net, p))
    return None


def try_source(net: PetriNet, m: Marking, names: FreshNames) -> Optional[ReductionStep]:
    """[SOURCE] p is never refilled and only drained by silent sinks consuming one token."""
    for p in net.places:
        if net.producers(p):
            continue
        drains = net.consumers(p)
        if not drains:
            continue
        if all(net.is_silent(u) and dict(net.pre[u]) == {p: 1} and not net.post[u] for u in drains):
            matched = {"place": p, "drains": ",".join(drains)}
            return _step(RuleId.SOURCE, matched, (at_most(p, m[p]),), net, m, _drop_place(net, p, drains))
    return None


def try_red(net: PetriNet, m: Marking, names: FreshNames) -> Optional[ReductionStep]:
    """[RED] two places with identical flow rows; the one holding more tokens goes."""
    first_with: Dict[tuple, str] = {}
    for p in net.places:
        row = net.place_row(p)
        if row in first_with:
            a, b = first_with[row], p
            y, z = (a, b) if m[a] <= m[b] else (b, a)
            eq = equation(z, LinExpr.var(y) + (m[z] - m[y]))
            return _step(RuleId.RED, {"y": y, "z": z}, (eq,), net, m, _drop_place(net, z))
        first_with[row] = p
    return None


def try_shortcut(net: PetriNet, m: Marking, names: FreshNames) -> Optional[ReductionStep]:
    """[SHORTCUT] the flow rows of z are the sums of those of y1 and y2."""
    rows = {p: net.place_row(p) for p in net.places}
    by_row: Dict[tuple, List[str]] = {}
    for p, r in rows.items():
        by_row.setdefault(r, []).append(p)
    zero = tuple((0, 0) for _ in net.transitions)

    for z in net.places:
        rz = rows[z]
        if rz == zero:
            continue
        for y1 in net.places:
            if y1 == z or rows[y1] == zero:
                continue
            diff = tuple((a - c, b - d) for (a, b), (c, d) in zip(rz, rows[y1]))
            if diff == zero or any(a < 0 or b < 0 for a, b in diff):
                continue
            for y2 in by_row.get(diff, ()):
                if y2 in (z, y1) or net.places.index(y2) < net.places.index(y1):
                    continue
                k = m[z] - m[y1] - m[y2]
                if k < 0:
                    continue
                eq = equation(z, LinExpr.sum_of([y1, y2]) + k)
                return _step(RuleId.SHORTCUT, {"y1": y1, "y2": y2, "z": z}, (eq,), net, m, _drop_place(net, z))
    return None


# -----------------------------
# Agglomerations
# -----------------------------

def _move(net: PetriNet, t: str) -> Optional[Tuple[str, str]]:
    """(src, dst) when t is a silent unit move between two distinct places."""
    if not net.is_silent(t):
        return None
    a = _single(net.pre[t])
    b = _single(net.post[t])
    if a is None or b is None or a[1] != 1 or b[1] != 1 or a[0] == b[0]:
        return None
    return a[0], b[0]


def try_concat(net: PetriNet, m: Marking, names: FreshNames) -> Optional[ReductionStep]:
    """
    [CONCAT] y1 -t-> y2 with t silent, t the only way out of y1 and the only
    way into y2, and y2 initially empty: y1 and y2 fuse into x = y1 + y2.
    """
    for t in net.transitions:
        mv = _move(net, t)
        if mv is None:
            continue
        y1, y2 = mv
        if m[y2] != 0:
            continue
        if net.consumers(y1) != (t,) or net.producers(y2) != (t,):
            continue
        if not _unit_arcs(net, (y1, y2)):
            continue
        x = names.next()
        after = _fuse(net, (y1, y2), x, drop=(t,))
        eq = equation(x, LinExpr.sum_of([y1, y2]))
        return _step(
            RuleId.CONCAT, {"t": t, "y1": y1, "y2": y2, "x": x}, (eq,), net, m, after,
            fresh=(x,), merged={x: (y1, y2)},
        )
    return None


def try_agg(net: PetriNet, m: Marking, names: FreshNames) -> Optional[ReductionStep]:
    """[AGG] y1 and y2 exchange tokens freely through a silent loop; they fuse."""
    moves = [(t, _move(net, t)) for t in net.transitions]
    for t12, mv in moves:
        if mv is None:
            continue
        y1, y2 = mv
        for t21, back in moves:
            if back != (y2, y1):
                continue
            if not _unit_arcs(net, (y1, y2)):
                continue
            x = names.next()
            after = _fuse(net, (y1, y2), x, drop=(t12, t21))
            eq = equation(x, LinExpr.sum_of([y1, y2]))
            return _step(
                RuleId.AGG, {"forward": t12, "backward": t21, "y1": y1, "y2": y2, "x": x}, (eq,), net, m, after,
                fresh=(x,), merged={x: (y1, y2)},
            )
    return None


# -----------------------------
# Grouped entry points
# -----------------------------

def try_redundant_place(net: PetriNet, m: Marking, names: FreshNames) -> Optional[ReductionStep]:
    return try_red(net, m, names) or try_shortcut(net, m, names)


def try_constant_source(net: PetriNet, m: Marking, names: FreshNames) -> Optional[ReductionStep]:
    return try_constant(net, m, names) or try_source(net, m, names)


RULES: Mapping[RuleId, Matcher] = {
    RuleId.DEADT: try_dead_transition,
    RuleId.REDT: try_redundant_transition,
    RuleId.CONSTANT: try_constant,
    RuleId.RED: try_red,
    RuleId.SHORTCUT: try_shortcut,
    RuleId.CONCAT: try_concat,
    RuleId.AGG: try_agg,
    RuleId.SOURCE: try_source,
}
