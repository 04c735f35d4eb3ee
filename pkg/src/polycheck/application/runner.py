"""
Run orchestration: load -> reduce -> portfolio of procedures per query ->
optional oracle cross-check -> report.
"""
from __future__ import annotations

import logging
import threading
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from polycheck.checking.bmc import BmcOutcome, bmc_check, bmc_with_reduction
from polycheck.checking.oracle import StateGraph, enumerate_states, explicit_check
from polycheck.checking.pdr import pdr_with_reduction, prove
from polycheck.core.config.settings import RunConfig, SolverConfig
from polycheck.core.logic.formula import Formula, negate
from polycheck.core.logic.predicates import is_syntactically_monotonic_goal
from polycheck.core.reduction.reducer import ReductionTrace, reduce, reduction_ratio, render_system
from polycheck.domain.enums import BmcStatus, Method, Quantifier, VerdictKind
from polycheck.domain.exceptions import SolverError
from polycheck.domain.models import Marking, PetriNet, Verdict
from polycheck.infrastructure.io.loader import load_net, load_queries
from polycheck.infrastructure.io.properties import NamedQuery
from polycheck.infrastructure.io.report import QueryReport, ReductionSummary, Report
from polycheck.infrastructure.smt.manager import SolverContext
from polycheck.infrastructure.smt.session import SolverSession

log = logging.getLogger(__name__)

Task = Callable[[SolverSession], Verdict]


# -----------------------------
# Verdict mapping
# -----------------------------

def bmc_verdict(out: BmcOutcome, quantifier: Quantifier) -> Verdict:
    """BMC searched for the goal (EF) or for a violation of the invariant (AG)."""
    if out.status == BmcStatus.UNKNOWN:
        return Verdict.unknown(out.reason or "bmc", method="bmc", notes=out.notes)
    found = out.status == BmcStatus.REACHABLE
    if quantifier == Quantifier.EF:
        kind = VerdictKind.REACHABLE if found else VerdictKind.UNREACHABLE
    else:
        kind = VerdictKind.NOT_INVARIANT if found else VerdictKind.INVARIANT
    notes = out.notes
    if out.reduced_trace is not None:
        notes = notes + (f"reduced-net witness: {out.reduced_trace}",)
    return Verdict(kind, witness=out.trace, marking=out.marking, method="bmc", depth=out.depth, notes=notes)


def pdr_verdict(v: Verdict, quantifier: Quantifier) -> Verdict:
    """PDR always proves an invariant; EF goals were handed over as AG not-goal."""
    v = replace(v, method="pdr")
    if quantifier == Quantifier.AG or not v.definitive:
        return v
    kind = VerdictKind.UNREACHABLE if v.kind == VerdictKind.INVARIANT else VerdictKind.REACHABLE
    return replace(v, kind=kind)


# -----------------------------
# Portfolio
# -----------------------------

class Portfolio:
    """
    Runs procedures concurrently, each in its own solver session. The first
    definitive verdict wins; every other session is interrupted.
    """

    def __init__(self, solver: SolverConfig, cancel: Optional[threading.Event] = None):
        self.solver = solver
        self.cancel = cancel or threading.Event()
        self._sessions: Dict[str, SolverSession] = {}
        self._lock = threading.Lock()

    def run(
        self, tasks: Sequence[Tuple[str, Task]], deadline: Optional[float] = None
    ) -> Tuple[Optional[Tuple[str, Verdict]], List[Tuple[str, Verdict]]]:
        if not tasks:
            return None, []
        timer = None
        if deadline is not None:
            timer = threading.Timer(max(0.0, deadline - time.monotonic()), self.stop)
            timer.daemon = True
            timer.start()
        winner: Optional[Tuple[str, Verdict]] = None
        attempts: List[Tuple[str, Verdict]] = []
        try:
            with ThreadPoolExecutor(max_workers=len(tasks), thread_name_prefix="polycheck") as pool:
                futures = {pool.submit(self._guarded, name, fn): name for name, fn in tasks}
                for fut in as_completed(futures):
                    name = futures[fut]
                    verdict = fut.result()
                    attempts.append((name, verdict))
                    log.debug("%s finished: %s", name, verdict.kind.value)
                    if winner is None and verdict.definitive:
                        winner = (name, verdict)
                        self.stop()
        finally:
            if timer is not None:
                timer.cancel()
        return winner, attempts

    def stop(self) -> None:
        self.cancel.set()
        with self._lock:
            sessions = list(self._sessions.values())
        for s in sessions:
            s.interrupt()

    def _guarded(self, name: str, fn: Task) -> Verdict:
        if self.cancel.is_set():
            return Verdict.unknown("cancelled", method=name)
        try:
            with SolverContext(self.solver) as session:
                with self._lock:
                    self._sessions[name] = session
                try:
                    return fn(session)
                finally:
                    with self._lock:
                        self._sessions.pop(name, None)
        except SolverError as exc:
            if self.cancel.is_set():
                return Verdict.unknown("cancelled", method=name)
            log.warning("%s: solver failure: %s", name, exc)
            return Verdict.unknown(f"solver: {exc}", method=name)


# -----------------------------
# Query planning
# -----------------------------

def plan(
    query: NamedQuery,
    net: PetriNet,
    m0: Marking,
    trace: Optional[ReductionTrace],
    config: RunConfig,
    deadline: Optional[float],
    cancel: threading.Event,
) -> Tuple[List[Tuple[str, Task]], List[Tuple[str, Verdict]]]:
    """
    Procedures to run for one query, plus the verdicts of requested procedures
    that cannot apply. BMC searches the goal (EF) or its negation (AG); PDR
    runs when that search target is monotone.
    """
    methods = set(config.methods)
    target: Formula = query.formula if query.quantifier == Quantifier.EF else negate(query.formula)
    invariant = negate(target)
    monotone = is_syntactically_monotonic_goal(target)
    reduced = trace is not None and bool(trace.steps)

    tasks: List[Tuple[str, Task]] = []
    skipped: List[Tuple[str, Verdict]] = []

    if methods & {Method.AUTO, Method.BMC}:
        def run_bmc(session: SolverSession) -> Verdict:
            if reduced:
                out = bmc_with_reduction(
                    net, m0, target, session, config.budget, trace=trace,
                    fixpoint_check=config.fixpoint_check, deadline=deadline, cancel=cancel,
                )
            else:
                out = bmc_check(
                    net, m0, target, session, config.budget,
                    fixpoint_check=config.fixpoint_check, deadline=deadline, cancel=cancel,
                )
            return bmc_verdict(out, query.quantifier)

        tasks.append(("bmc", run_bmc))

    if methods & {Method.AUTO, Method.PDR}:
        if monotone:
            def run_pdr(session: SolverSession) -> Verdict:
                kw = dict(check_oars=config.check_oars, deadline=deadline, cancel=cancel)
                if reduced:
                    v = pdr_with_reduction(net, m0, invariant, session, config.budget, trace=trace, **kw)
                else:
                    v = prove(net, m0, invariant, session, config.budget, **kw)
                return pdr_verdict(v, query.quantifier)

            tasks.append(("pdr", run_pdr))
        elif Method.PDR in methods:
            skipped.append(("pdr", Verdict.unknown("goal outside the monotone fragment", method="pdr")))
    return tasks, skipped


# -----------------------------
# Entry point
# -----------------------------

def answer(
    query: NamedQuery,
    net: PetriNet,
    m0: Marking,
    trace: Optional[ReductionTrace],
    config: RunConfig,
    oracle: Optional[StateGraph] = None,
) -> QueryReport:
    start = time.monotonic()
    deadline = start + config.timeout_s
    budget_deadline = config.budget.deadline(start)
    if budget_deadline is not None:
        deadline = min(deadline, budget_deadline)

    portfolio = Portfolio(config.solver)
    tasks, skipped = plan(query, net, m0, trace, config, deadline, portfolio.cancel)
    winner, attempts = portfolio.run(tasks, deadline)
    attempts = skipped + attempts
    if winner is not None:
        verdict = winner[1]
    else:
        reasons = "; ".join(f"{m}: {v.reason}" for m, v in attempts) or "no procedure applies"
        verdict = Verdict.unknown(reasons)
    elapsed = time.monotonic() - start

    checked = None
    if oracle is not None:
        checked = explicit_check(oracle, query.quantifier, query.formula, net.places)
    rep = QueryReport(query.name, query.quantifier, query.text, verdict, elapsed, tuple(attempts), checked)
    log.info("%s: %s by %s in %.0f ms", query.name, rep.answer, verdict.method or "-", elapsed * 1000)
    if rep.agrees is False:
        log.warning("%s: oracle says %s, %s says %s", query.name, checked.kind.value, verdict.method, verdict.kind.value)
    return rep


def run(config: RunConfig) -> Report:
    net, m0 = load_net(config.net_path, config.resolved_format())
    queries = load_queries(config, net)
    log.info("loaded %s: %d places, %d transitions, %d queries",
             net.name, len(net.places), len(net.transitions), len(queries))

    trace = reduce(net, m0, config.policy) if config.reductions else None
    summary = None
    if trace is not None:
        summary = ReductionSummary(
            places_before=len(net.places),
            places_after=len(trace.final_net.places),
            transitions_before=len(net.transitions),
            transitions_after=len(trace.final_net.transitions),
            steps=len(trace.steps),
            ratio=reduction_ratio(trace),
            system=render_system(trace),
        )

    graph = enumerate_states(net, m0, config.cutoffs) if config.oracle_check else None
    reports = [answer(q, net, m0, trace, config, graph) for q in queries]
    return Report(net.name, summary, reports)


__all__ = ["Portfolio", "answer", "bmc_verdict", "pdr_verdict", "plan", "run"]
