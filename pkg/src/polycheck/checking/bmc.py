"""
Bounded model checking of EF goals.

The unrolling phi_k grows in one incremental session; the goal at the last
generation is pushed and popped at every depth, so the first satisfiable
depth is the length of a shortest witness.
"""
from __future__ import annotations

import logging
import threading
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Tuple

from polycheck.core.abstraction.transform import e_transform
from polycheck.core.config.settings import Budget, ReductionPolicy
from polycheck.core.logic.formula import Formula, eliminate_exists, rename
from polycheck.core.logic.predicates import marking_cube
from polycheck.core.net.firing import fire_sequence
from polycheck.core.reduction.reducer import ReductionTrace, reduce
from polycheck.domain.enums import BmcStatus
from polycheck.domain.exceptions import EncodingError, SolverError, UndecidedError, WitnessLiftError
from polycheck.domain.models import FiringSequence, Marking, PetriNet
from polycheck.infrastructure.smt.encoding import (
    GenerationCounter,
    VarVec,
    at_generation,
    decode_marking,
    decode_step,
    encode_transition_relation,
    initial_cube,
    nonnegativity,
    pairwise_distinct,
)
from polycheck.infrastructure.smt.session import SolverSession

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class BmcOutcome:
    status: BmcStatus
    depth: Optional[int] = None
    marking: Optional[Marking] = None
    trace: Optional[FiringSequence] = None
    reason: Optional[str] = None
    iterations: int = 0
    # set by bmc_with_reduction
    reduced_marking: Optional[Marking] = None
    reduced_trace: Optional[FiringSequence] = None
    notes: Tuple[str, ...] = field(default=())

    @property
    def reachable(self) -> bool:
        return self.status == BmcStatus.REACHABLE


def _expired(deadline: Optional[float], cancel: Optional[threading.Event]) -> Optional[str]:
    if cancel is not None and cancel.is_set():
        return "cancelled"
    if deadline is not None and time.monotonic() >= deadline:
        return "wall clock"
    return None


def _witness(net: PetriNet, model, gens: List[VarVec]) -> Tuple[Marking, FiringSequence]:
    markings = [decode_marking(model, g) for g in gens]
    steps = []
    for a, b in zip(markings, markings[1:]):
        t = decode_step(net, a, b)
        if t is not None:
            steps.append(t)
    seq = FiringSequence(tuple(steps))
    final = fire_sequence(net, markings[0], seq)
    if final != markings[-1]:
        raise EncodingError(f"witness replays to {final.render()}, model says {markings[-1].render()}")
    return final, seq


@contextmanager
def _scope(session: SolverSession) -> Iterator[None]:
    base = session.depth
    session.push()
    try:
        yield
    finally:
        while session.alive and session.depth > base:
            session.pop()


def bmc_check(
    net: PetriNet,
    m0: Marking,
    goal: Formula,
    session: SolverSession,
    budget: Optional[Budget] = None,
    *,
    fixpoint_check: bool = False,
    deadline: Optional[float] = None,
    cancel: Optional[threading.Event] = None,
) -> BmcOutcome:
    """
    Search for a marking satisfying goal within budget.max_depth steps.

    With fixpoint_check, depth k also asks whether a path of k steps through
    pairwise distinct markings exists; when none does every reachable marking
    has been covered and the outcome is EXHAUSTED. A net without places or
    transitions is exhausted after depth 0.
    """
    budget = budget or Budget()
    if deadline is None:
        deadline = budget.deadline()
    counter = GenerationCounter(net.places)
    gens = [counter.fresh_generation()]
    iterations = 0

    try:
        with _scope(session):
            session.assert_term(nonnegativity(gens[0]))
            session.assert_term(initial_cube(m0, gens[0]))
            k = 0
            while True:
                stop = _expired(deadline, cancel)
                if stop is not None:
                    return BmcOutcome(BmcStatus.UNKNOWN, reason=stop, iterations=iterations)

                session.push()
                session.assert_term(at_generation(goal, gens[-1]))
                r = session.check_sat()
                if r.is_sat:
                    model = session.get_model([n for g in gens for n in g.names])
                    session.pop()
                    final, seq = _witness(net, model, gens)
                    log.info("bmc: goal reached at depth %d (%s)", k, seq)
                    return BmcOutcome(BmcStatus.REACHABLE, depth=k, marking=final, trace=seq, iterations=iterations)
                session.pop()
                if r.is_unknown:
                    return BmcOutcome(BmcStatus.UNKNOWN, reason=r.reason or "solver", iterations=iterations)

                if not net.places or not net.transitions:
                    return BmcOutcome(BmcStatus.EXHAUSTED, depth=k, iterations=iterations)

                if fixpoint_check and k > 0:
                    session.push()
                    session.assert_term(pairwise_distinct(gens))
                    loop_free = session.check_sat()
                    session.pop()
                    if loop_free.is_unsat:
                        log.info("bmc: no loop-free path of length %d, state space exhausted", k)
                        return BmcOutcome(BmcStatus.EXHAUSTED, depth=k, iterations=iterations)

                if k >= budget.max_depth:
                    return BmcOutcome(BmcStatus.UNKNOWN, reason="depth", iterations=iterations)

                nxt = counter.fresh_generation()
                session.assert_term(nonnegativity(nxt))
                session.assert_term(encode_transition_relation(net, gens[-1], nxt))
                gens.append(nxt)
                iterations += 1
                k += 1
                log.debug("bmc: depth %d", k)
    except SolverError as exc:
        log.warning("bmc: solver failure: %s", exc)
        return BmcOutcome(BmcStatus.UNKNOWN, reason=f"solver: {exc}", iterations=iterations)


def lift_witness(
    trace: ReductionTrace,
    m2: Marking,
    goal: Formula,
    session: SolverSession,
) -> Marking:
    """
    An initial-net marking compatible with m2 under the trace's system and
    satisfying goal: one solver query over E, the m2 cube and the goal.
    Raises WitnessLiftError when no such marking exists and UndecidedError
    when the solver cannot tell.
    """
    system = trace.system
    names = {v: f"lift_{v}" for v in system.variables}
    query = [
        rename(system.as_formula(), names),
        rename(marking_cube(m2, system.reduced_places), names),
        rename(goal, names),
    ]
    session.push()
    try:
        for f in query:
            session.assert_term(f)
        r = session.check_sat()
        if r.is_unknown:
            raise UndecidedError(f"lifting {m2.render()}", r.reason or "unknown")
        if not r.is_sat:
            raise WitnessLiftError(f"reduced witness {m2.render()} has no counterpart in the initial net")
        model = session.get_model([names[p] for p in system.initial_places])
    finally:
        if session.alive:
            session.pop()
    return Marking.of({p: model[names[p]] for p in system.initial_places})


def bmc_with_reduction(
    net: PetriNet,
    m0: Marking,
    goal: Formula,
    session: SolverSession,
    budget: Optional[Budget] = None,
    *,
    policy: Optional[ReductionPolicy] = None,
    trace: Optional[ReductionTrace] = None,
    fixpoint_check: bool = False,
    deadline: Optional[float] = None,
    cancel: Optional[threading.Event] = None,
) -> BmcOutcome:
    """
    BMC on the reduced net against the E-transformed goal. A reduced witness
    is lifted to an initial-net marking, then a second search from m0 recovers
    an initial-net firing sequence to it. depth stays the reduced-net depth;
    trace is None when the second search runs out of budget.
    """
    budget = budget or Budget()
    if deadline is None:
        deadline = budget.deadline()
    trace = trace or reduce(net, m0, policy)
    if not trace.steps:
        return bmc_check(net, m0, goal, session, budget, fixpoint_check=fixpoint_check, deadline=deadline, cancel=cancel)

    goal2 = eliminate_exists(e_transform(goal, trace.system))
    out = bmc_check(
        trace.final_net, trace.final_marking, goal2, session, budget,
        fixpoint_check=fixpoint_check, deadline=deadline, cancel=cancel,
    )
    if not out.reachable:
        return out
    assert out.marking is not None

    try:
        lifted = lift_witness(trace, out.marking, goal, session)
    except SolverError as exc:
        log.warning("bmc: %s", exc)
        return BmcOutcome(
            BmcStatus.UNKNOWN,
            reason=f"witness lift: {getattr(exc, 'reason', exc)}",
            iterations=out.iterations,
            reduced_marking=out.marking,
            reduced_trace=out.trace,
        )

    notes = ["witness found on the reduced net; initial-net marking lifted through E"]
    replay = bmc_check(net, m0, marking_cube(lifted, net.places), session, budget, deadline=deadline, cancel=cancel)
    seq = replay.trace if replay.reachable else None
    if seq is None:
        notes.append(f"no initial-net firing sequence recovered ({replay.reason or replay.status.value})")
    return BmcOutcome(
        BmcStatus.REACHABLE,
        depth=out.depth,
        marking=lifted,
        trace=seq,
        iterations=out.iterations,
        reduced_marking=out.marking,
        reduced_trace=out.trace,
        notes=tuple(notes),
    )


__all__ = ["BmcOutcome", "bmc_check", "bmc_with_reduction", "lift_witness"]
