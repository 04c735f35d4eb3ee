"""
Explicit-state oracle: bounded reachability graphs, goal checking by
enumeration, and a bounded check of the E-abstraction relation between a
net and its reduction.
"""
from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Deque, Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

from polycheck.core.abstraction.system import LinearSystem
from polycheck.core.abstraction.transform import compatible_images, is_compatible, preimage
from polycheck.core.config.settings import OracleCutoffs
from polycheck.core.logic.formula import Formula, SatOracle, evaluate
from polycheck.core.net.firing import fire, is_enabled, successors
from polycheck.core.reduction.reducer import ReductionTrace
from polycheck.domain.enums import AbstractionStatus, Quantifier, VerdictKind
from polycheck.domain.exceptions import UnboundedPreimageError
from polycheck.domain.models import FiringSequence, Marking, ObservationSequence, PetriNet, Verdict

log = logging.getLogger(__name__)


# -----------------------------
# State graphs
# -----------------------------

@dataclass
class StateGraph:
    initial: Marking
    states: List[Marking] = field(default_factory=list)  # BFS order
    edges: Dict[Marking, List[Tuple[str, Marking]]] = field(default_factory=dict)
    parents: Dict[Marking, Optional[Tuple[Marking, str]]] = field(default_factory=dict)
    depth: Dict[Marking, int] = field(default_factory=dict)
    truncated: bool = False
    cutoff: Optional[str] = None

    def __len__(self) -> int:
        return len(self.states)

    def __contains__(self, m: object) -> bool:
        return m in self.depth


def _too_large(m: Marking, max_tokens: int) -> bool:
    return any(n > max_tokens for _, n in m.items_)


def enumerate_states(net: PetriNet, m0: Marking, cutoffs: Optional[OracleCutoffs] = None) -> StateGraph:
    """
    Breadth-first reachability graph. Markings with a place above max_tokens
    are not entered, and exploration stops at max_states; either cutoff flags
    the graph truncated.
    """
    cutoffs = cutoffs or OracleCutoffs()
    m0 = m0.restrict(net.places)
    g = StateGraph(initial=m0, states=[m0], parents={m0: None}, depth={m0: 0})
    queue: Deque[Marking] = deque([m0])
    while queue:
        m = queue.popleft()
        out = g.edges.setdefault(m, [])
        for t, m1 in successors(net, m):
            if _too_large(m1, cutoffs.max_tokens):
                g.truncated, g.cutoff = True, "tokens"
                continue
            out.append((t, m1))
            if m1 in g.depth:
                continue
            if len(g.states) >= cutoffs.max_states:
                g.truncated, g.cutoff = True, "states"
                continue
            g.states.append(m1)
            g.parents[m1] = (m, t)
            g.depth[m1] = g.depth[m] + 1
            queue.append(m1)
    log.debug("oracle: %d states%s", len(g.states), f" (cut at {g.cutoff})" if g.truncated else "")
    return g


def shortest_path(graph: StateGraph, target: Marking) -> FiringSequence:
    steps: List[str] = []
    cur = target
    while True:
        link = graph.parents[cur]
        if link is None:
            break
        cur, t = link
        steps.append(t)
    return FiringSequence(tuple(reversed(steps)))


def explicit_check(
    graph: StateGraph,
    quantifier: Quantifier,
    goal: Formula,
    places: Sequence[str],
    solver: Optional[SatOracle] = None,
) -> Verdict:
    """Decide EF goal / AG goal over an enumerated graph; a truncated graph only yields positive evidence."""
    want = quantifier == Quantifier.EF
    for m in graph.states:
        if evaluate(goal, m, places, solver=solver) == want:
            seq = shortest_path(graph, m)
            kind = VerdictKind.REACHABLE if want else VerdictKind.NOT_INVARIANT
            return Verdict(kind, witness=seq, marking=m, method="explicit", depth=len(seq))
    if graph.truncated:
        return Verdict.unknown(f"state space cut at {graph.cutoff}", method="explicit")
    kind = VerdictKind.UNREACHABLE if want else VerdictKind.INVARIANT
    return Verdict(kind, method="explicit", depth=max(graph.depth.values(), default=0))


# -----------------------------
# Bounded E-abstraction check
# -----------------------------

Witness = Tuple[ObservationSequence, Marking, str]


@dataclass(frozen=True)
class AbstractionCheck:
    status: AbstractionStatus
    depth: int = 0
    witness: Optional[Witness] = None
    complete: bool = False
    reason: Optional[str] = None

    @property
    def certified(self) -> bool:
        return self.status == AbstractionStatus.CERTIFIED


class _Overflow(Exception):
    pass


def tau_closure(net: PetriNet, start: Iterable[Marking], cutoffs: OracleCutoffs) -> FrozenSet[Marking]:
    seen: Set[Marking] = set(start)
    queue = deque(seen)
    while queue:
        m = queue.popleft()
        for t in net.transitions:
            if net.is_silent(t) and is_enabled(net, m, t):
                m1 = fire(net, m, t)
                if m1 in seen:
                    continue
                if _too_large(m1, cutoffs.max_tokens) or len(seen) >= cutoffs.max_states:
                    raise _Overflow()
                seen.add(m1)
                queue.append(m1)
    return frozenset(seen)


def observation_reach(net: PetriNet, states: Iterable[Marking], label: str, cutoffs: OracleCutoffs) -> FrozenSet[Marking]:
    step = {fire(net, m, t) for m in states for t in net.transitions if net.label_of(t) == label and is_enabled(net, m, t)}
    return tau_closure(net, step, cutoffs) if step else frozenset()


def _visible_labels(net: PetriNet, states: Iterable[Marking]) -> Set[str]:
    return {net.label_of(t) for m in states for t in net.transitions if not net.is_silent(t) and is_enabled(net, m, t)}


def _violation(
    system: LinearSystem,
    s1: FrozenSet[Marking],
    s2: FrozenSet[Marking],
    bound: int,
) -> Optional[Tuple[Marking, str]]:
    for m in sorted(s1, key=lambda m: m.items_):
        images = list(compatible_images(system, m, bound=bound))
        if not images:
            return m, "initial"
        if any(img not in s2 for img in images):
            return m, "initial"
    for m in sorted(s2, key=lambda m: m.items_):
        pres = list(preimage(system, m, bound=bound))
        if not pres:
            return m, "reduced"
        if any(pre not in s1 for pre in pres):
            return m, "reduced"
    return None


def check_e_abstraction_bounded(
    n1: PetriNet,
    m1: Marking,
    n2: PetriNet,
    m2: Marking,
    system: LinearSystem,
    cutoffs: Optional[OracleCutoffs] = None,
) -> AbstractionCheck:
    """
    Explore both nets in lockstep, one observation at a time. After every
    observation sequence, each marking one net can reach must have all its
    compatible counterparts reachable in the other net with the same
    sequence. Runs up to obs_depth observations.
    """
    cutoffs = cutoffs or OracleCutoffs()
    m1, m2 = m1.restrict(n1.places), m2.restrict(n2.places)
    if not is_compatible(system, m1, m2):
        return AbstractionCheck(AbstractionStatus.REFUTED, 0, (ObservationSequence(), m1, "initial"), True,
                                reason="initial markings are not compatible")
    try:
        start = (tau_closure(n1, [m1], cutoffs), tau_closure(n2, [m2], cutoffs))
        seen = {start}
        queue: Deque[Tuple[FrozenSet[Marking], FrozenSet[Marking], ObservationSequence]] = deque(
            [(start[0], start[1], ObservationSequence())]
        )
        complete = True
        explored = 0
        while queue:
            s1, s2, obs = queue.popleft()
            explored = max(explored, len(obs))
            bad = _violation(system, s1, s2, cutoffs.max_tokens)
            if bad is not None:
                m, side = bad
                log.info("abstraction refuted after %s at %s (%s side)", list(obs), m.render(), side)
                return AbstractionCheck(AbstractionStatus.REFUTED, len(obs), (obs, m, side), True)
            labels = sorted(_visible_labels(n1, s1) | _visible_labels(n2, s2))
            for a in labels:
                pair = (observation_reach(n1, s1, a, cutoffs), observation_reach(n2, s2, a, cutoffs))
                if pair in seen:
                    continue
                if len(obs) + 1 > cutoffs.obs_depth:
                    complete = False
                    continue
                seen.add(pair)
                queue.append((pair[0], pair[1], obs + ObservationSequence((a,))))
    except _Overflow:
        return AbstractionCheck(AbstractionStatus.INCONCLUSIVE, reason="token or state cutoff reached")
    except UnboundedPreimageError as exc:
        return AbstractionCheck(AbstractionStatus.INCONCLUSIVE, reason=str(exc))
    return AbstractionCheck(AbstractionStatus.CERTIFIED, explored, None, complete)


def check_trace(trace: ReductionTrace, cutoffs: Optional[OracleCutoffs] = None) -> List[AbstractionCheck]:
    """Bounded check of every single step, then of the whole trace."""
    results = []
    for step in trace.steps:
        system = LinearSystem.build(step.equations, step.net_before.places, step.net_after.places)
        results.append(
            check_e_abstraction_bounded(step.net_before, step.marking_before, step.net_after, step.marking_after,
                                        system, cutoffs)
        )
    results.append(
        check_e_abstraction_bounded(trace.initial_net, trace.initial_marking, trace.final_net, trace.final_marking,
                                    trace.system, cutoffs)
    )
    return results


__all__ = [
    "AbstractionCheck",
    "StateGraph",
    "check_e_abstraction_bounded",
    "check_trace",
    "enumerate_states",
    "explicit_check",
    "shortest_path",
]
