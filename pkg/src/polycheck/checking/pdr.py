"""
Property directed reachability for invariants AG F whose negation is
upward closed (coverability goals).

Frames F_1 .. F_{k+1} are clause sets over place names; F_0 is the initial
cube. Obligations carry cover cubes: every marking covering the cube reaches
a bad marking, which is what makes generalising a single witness to its
cover cube sound for Petri nets.
"""
from __future__ import annotations

import heapq
import itertools
import logging
import threading
import time
from dataclasses import dataclass, replace
from typing import FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

from polycheck.core.abstraction.transform import e_transform, is_monotone_system
from polycheck.core.config.settings import Budget, ReductionPolicy
from polycheck.core.logic.formula import (
    Atom,
    Formula,
    clause_formula,
    conj,
    eliminate_exists,
    evaluate,
    is_quantifier_free,
    negate,
    to_cnf,
)
from polycheck.core.logic.predicates import cover_predicate, is_syntactically_monotonic_goal
from polycheck.core.net.firing import fire_sequence
from polycheck.core.reduction.reducer import ReductionTrace, reduce
from polycheck.domain.enums import VerdictKind
from polycheck.domain.exceptions import CertificationError, CounterexampleFound, SolverError
from polycheck.domain.models import FiringSequence, Marking, PetriNet, Verdict
from polycheck.infrastructure.smt.encoding import (
    GenerationCounter,
    VarVec,
    at_generation,
    decode_marking,
    decode_step,
    encode_transition_relation,
    initial_cube,
    nonnegativity,
)
from polycheck.infrastructure.smt.session import SolverSession

log = logging.getLogger(__name__)

Cube = Tuple[Atom, ...]
Clause = FrozenSet[Atom]


@dataclass(frozen=True)
class ProofObligation:
    """cube must be shown unreachable in one step from frame `level`."""
    cube: Cube
    level: int
    parent: Optional["ProofObligation"] = None
    via: Optional[str] = None  # fires from any marking of cube into parent.cube
    seq: int = 0


@dataclass(frozen=True)
class Certificate:
    """An inductive invariant: the conjunction of its clauses."""
    clauses: Tuple[Clause, ...]
    level: int

    def formula(self) -> Formula:
        return conj(*(clause_formula(c) for c in self.clauses))

    def render(self) -> str:
        return "\n".join(str(clause_formula(c)) for c in self.clauses) or "true"


class _Abort(Exception):
    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


def generalize_witness(m: Marking, places: Sequence[str]) -> Cube:
    """Cover cube of m: one `p >= m(p)` literal per marked place."""
    f = cover_predicate(m, places)
    if isinstance(f, Atom):
        return (f,)
    return tuple(getattr(f, "args", ()))


def _negate_cube(cube: Cube) -> Formula:
    return negate(conj(*cube))


def _clause_of(cube: Cube) -> Clause:
    return frozenset(negate(a) for a in cube)  # type: ignore[misc]


# -----------------------------
# Engine
# -----------------------------

class Pdr:
    def __init__(
        self,
        net: PetriNet,
        m0: Marking,
        invariant: Formula,
        session: SolverSession,
        budget: Optional[Budget] = None,
        *,
        check_oars: bool = False,
        deadline: Optional[float] = None,
        cancel: Optional[threading.Event] = None,
    ):
        self.net = net
        self.m0 = m0.restrict(net.places)
        self.env0 = {p: self.m0[p] for p in net.places}
        self.invariant = invariant
        self.bad = negate(invariant)
        self.session = session
        self.budget = budget or Budget()
        self.deadline = deadline if deadline is not None else self.budget.deadline()
        self.cancel = cancel
        self.debug_checks = check_oars

        counter = GenerationCounter(net.places)
        self.x: VarVec = counter.fresh_generation()
        self.xp: VarVec = counter.fresh_generation()

        flat = eliminate_exists(invariant)
        cnf = to_cnf(flat) if is_quantifier_free(flat) else None
        self.goal_clauses: FrozenSet[Clause] = frozenset(cnf or ())
        self.frames: List[Set[Clause]] = []
        self._seq = itertools.count(1)
        self.k = 0

    # -----------------------
    # Public API
    # -----------------------
    def prove(self) -> Verdict:
        try:
            return self._prove()
        except _Abort as stop:
            return Verdict.unknown(stop.reason, method="pdr")
        except SolverError as exc:
            log.warning("pdr: solver failure: %s", exc)
            return Verdict.unknown(f"solver: {exc}", method="pdr")

    def strengthen(self, k: int) -> None:
        """Block every bad successor of F_k; raises CounterexampleFound."""
        while True:
            self._tick()
            sat, model = self._solve([self.frame(k, self.x), at_generation(self.bad, self.xp)], want_model=True)
            if not sat:
                return
            bad_state = decode_marking(model, self.xp)
            log.debug("pdr: level %d bad cube %s", k, bad_state.render())
            root = ProofObligation(generalize_witness(bad_state, self.net.places), k, seq=next(self._seq))
            n = self.inductively_generalize(root.cube, k - 2, k, origin=root)
            self.push_generalization([replace(root, level=n + 1)], k)

    def push_generalization(self, obligations: Iterable[ProofObligation], k: int) -> None:
        heap = [(o.level, o.seq, o) for o in obligations]
        heapq.heapify(heap)
        while heap:
            self._tick()
            n, _, o = heap[0]
            if n > k:
                return
            sat, model = self._solve(
                [self.frame(n, self.x), at_generation(_negate_cube(o.cube), self.x),
                 at_generation(conj(*o.cube), self.xp)],
                want_model=True,
            )
            if sat:
                p = decode_marking(model, self.x)
                t = decode_step(self.net, p, decode_marking(model, self.xp))
                child = ProofObligation(generalize_witness(p, self.net.places), n - 1, parent=o, via=t,
                                        seq=next(self._seq))
                level = self.inductively_generalize(child.cube, n - 2, k, origin=child)
                bumped = replace(child, level=level + 1)
                heapq.heappush(heap, (bumped.level, bumped.seq, bumped))
            else:
                heapq.heappop(heap)
                level = self.inductively_generalize(o.cube, n, k, origin=o)
                bumped = replace(o, level=level + 1, seq=next(self._seq))
                heapq.heappush(heap, (bumped.level, bumped.seq, bumped))

    def inductively_generalize(
        self,
        cube: Cube,
        min_level: int,
        k: int,
        *,
        origin: Optional[ProofObligation] = None,
    ) -> int:
        """
        Learn a clause blocking cube at level i - 1 for the first i in
        max(1, min_level + 1)..k where cube still has a predecessor outside
        itself, or at k when there is none. Returns that level. With
        min_level < 0 a one-step path from the initial marking into cube is a
        counterexample.
        """
        origin = origin or ProofObligation(cube, min_level + 1, seq=next(self._seq))
        if self._contains_initial(cube):
            raise CounterexampleFound(origin)
        if min_level < 0:
            sat, model = self._solve(
                [self.frame(0, self.x), at_generation(_negate_cube(cube), self.x), at_generation(conj(*cube), self.xp)],
                want_model=True,
            )
            if sat:
                t = decode_step(self.net, self.m0, decode_marking(model, self.xp))
                leaf = ProofObligation(generalize_witness(self.m0, self.net.places), 0, parent=origin, via=t,
                                       seq=next(self._seq))
                raise CounterexampleFound(leaf)

        level = k
        for i in range(max(1, min_level + 1), k + 1):
            if not self._consecution(list(cube), i):
                level = i - 1
                break
        clause = self.mic(cube, level)
        self._add_clause(clause, level + 1)
        return level

    def mic(self, cube: Cube, level: int) -> Clause:
        """
        Shrink ¬cube to a clause that still excludes m0 and stays inductive
        relative to F_level. The unsat core seeds the search; greedy passes
        then drop literals until no single drop survives both checks.
        """
        lits = list(cube)
        if len(lits) <= 1:
            return _clause_of(tuple(lits))

        if self.session.cores_supported:
            core = self._core(lits, level)
            if core is not None:
                reduced = [a for i, a in enumerate(lits) if i in core]
                if not self._initiation(reduced):
                    back = next(a for a in lits if not a.holds(self.env0) and a not in reduced)
                    reduced = [a for a in lits if a in reduced or a == back]
                if len(reduced) < len(lits) and self._consecution(reduced, level):
                    lits = reduced

        changed = True
        while changed and len(lits) > 1:
            changed = False
            for a in list(lits):
                cand = [b for b in lits if b != a]
                if cand and self._initiation(cand) and self._consecution(cand, level):
                    lits = cand
                    changed = True
                    break
        return _clause_of(tuple(lits))

    def propagate_clauses(self, k: int) -> None:
        for i in range(1, k + 1):
            for c in sorted(self.frames[i] - self.frames[i + 1], key=lambda c: str(clause_formula(c))):
                sat, _ = self._solve([self.frame(i, self.x), at_generation(negate(clause_formula(c)), self.xp)])
                if not sat:
                    self.frames[i + 1].add(c)

    def frame(self, i: int, x: VarVec) -> Formula:
        if i == 0:
            return initial_cube(self.m0, x)
        return conj(*(at_generation(clause_formula(c), x) for c in sorted(self.frames[i], key=lambda c: str(clause_formula(c)))))

    def check_oars(self, k: int) -> None:
        """Debug sweep: initiation, containment, consecution and bounding of F_0 .. F_{k+1}."""
        for i in range(1, k + 2):
            for c in self.frames[i]:
                if not evaluate(clause_formula(c), self.m0, self.net.places):
                    raise CertificationError(f"F_{i} clause {clause_formula(c)} excludes the initial marking")
        for i in range(1, k + 1):
            if not self.frames[i + 1] <= self.frames[i]:
                raise CertificationError(f"F_{i + 1} has clauses F_{i} lacks")
        for i in range(0, k + 1):
            for c in self.frames[i + 1]:
                sat, _ = self._solve([self.frame(i, self.x), at_generation(negate(clause_formula(c)), self.xp)])
                if sat:
                    raise CertificationError(f"F_{i} does not imply clause {clause_formula(c)} of F_{i + 1} after one step")
        for i in range(1, k + 1):
            sat, _ = self._solve([self.frame(i, self.x), at_generation(self.bad, self.x)])
            if sat:
                raise CertificationError(f"F_{i} meets the bad states")

    # -----------------------
    # Main loop
    # -----------------------
    def _prove(self) -> Verdict:
        s = self.session
        s.assert_term(nonnegativity(self.x))
        s.assert_term(nonnegativity(self.xp))
        s.assert_term(encode_transition_relation(self.net, self.x, self.xp))

        sat, _ = self._solve([initial_cube(self.m0, self.x), at_generation(self.bad, self.x)])
        if sat:
            return self._not_invariant(FiringSequence(()))
        sat, model = self._solve([initial_cube(self.m0, self.x), at_generation(self.bad, self.xp)], want_model=True)
        if sat:
            t = decode_step(self.net, self.m0, decode_marking(model, self.xp))
            return self._not_invariant(FiringSequence((t,) if t else ()))

        self.frames = [set(), set(self.goal_clauses), set(self.goal_clauses)]
        k = 1
        while True:
            self.k = k
            if k > self.budget.max_frames:
                return Verdict.unknown("frames", method="pdr")
            try:
                self.strengthen(k)
            except CounterexampleFound as cex:
                return self._not_invariant(self._trace(cex.obligation))
            self.propagate_clauses(k)
            if self.debug_checks:
                self.check_oars(k)
            for i in range(1, k + 1):
                if self.frames[i] == self.frames[i + 1]:
                    return self._invariant(i)
            log.debug("pdr: level %d done, frame sizes %s", k, [len(f) for f in self.frames[1:]])
            k += 1
            self.frames.append(set(self.goal_clauses))

    # -----------------------
    # Internal helpers
    # -----------------------
    def _tick(self) -> None:
        if self.cancel is not None and self.cancel.is_set():
            raise _Abort("cancelled")
        if self.deadline is not None and time.monotonic() >= self.deadline:
            raise _Abort("wall clock")

    def _solve(self, parts: Sequence[Formula], *, want_model: bool = False):
        s = self.session
        s.push()
        try:
            for f in parts:
                s.assert_term(f)
            r = s.check_sat()
            if r.is_unknown:
                raise _Abort(r.reason or "solver")
            model = s.get_model(self.x.names + self.xp.names) if (r.is_sat and want_model) else None
            return r.is_sat, model
        finally:
            if s.alive:
                s.pop()

    def _core(self, lits: List[Atom], level: int) -> Optional[Set[int]]:
        s = self.session
        s.push()
        try:
            s.assert_term(self.frame(level, self.x))
            s.assert_term(at_generation(_negate_cube(tuple(lits)), self.x))
            names = {}
            for i, a in enumerate(lits):
                label = s.assert_term(at_generation(a, self.xp), label="lit")
                if label is not None:
                    names[label] = i
            r = s.check_sat()
            if not r.is_unsat:
                return None
            return {names[l] for l in s.get_unsat_core() if l in names}
        finally:
            if s.alive:
                s.pop()

    def _consecution(self, lits: Sequence[Atom], level: int) -> bool:
        cube = tuple(lits)
        sat, _ = self._solve(
            [self.frame(level, self.x), at_generation(_negate_cube(cube), self.x), at_generation(conj(*cube), self.xp)]
        )
        return not sat

    def _initiation(self, lits: Sequence[Atom]) -> bool:
        return not self._contains_initial(tuple(lits))

    def _contains_initial(self, cube: Cube) -> bool:
        return all(a.holds(self.env0) for a in cube)

    def _add_clause(self, clause: Clause, upto: int) -> None:
        log.debug("pdr: learned %s for F_1..F_%d", clause_formula(clause), upto)
        for i in range(1, min(upto, len(self.frames) - 1) + 1):
            self.frames[i].add(clause)

    def _trace(self, o: ProofObligation) -> FiringSequence:
        steps: List[str] = []
        cur = o
        while cur.parent is not None:
            assert cur.via is not None
            steps.append(cur.via)
            cur = cur.parent
        return FiringSequence(tuple(steps))

    def _not_invariant(self, seq: FiringSequence) -> Verdict:
        final = fire_sequence(self.net, self.m0, seq)
        log.info("pdr: counterexample of length %d", len(seq))
        return Verdict(VerdictKind.NOT_INVARIANT, witness=seq, marking=final, method="pdr", depth=len(seq))

    def _invariant(self, i: int) -> Verdict:
        cert = Certificate(tuple(sorted(self.frames[i], key=lambda c: str(clause_formula(c)))), i)
        log.info("pdr: invariant found at level %d (%d clauses)", i, len(cert.clauses))
        return Verdict(VerdictKind.INVARIANT, method="pdr", depth=self.k, certificate=cert)


# -----------------------------
# Certification
# -----------------------------

def certify(
    net: PetriNet,
    m0: Marking,
    invariant: Formula,
    certificate: Certificate,
    session: SolverSession,
) -> bool:
    """
    Re-check a certificate from scratch: it holds initially, is preserved by
    every transition and excludes the bad states. Raises CertificationError
    on a failed check; False when the solver could not decide one.
    """
    inv = certificate.formula()
    if not evaluate(inv, m0, net.places):
        raise CertificationError("the initial marking violates the certificate")
    counter = GenerationCounter(net.places, prefix="c")
    x, xp = counter.fresh_generation(), counter.fresh_generation()
    decided = True
    session.push()
    try:
        session.assert_term(nonnegativity(x))
        session.assert_term(nonnegativity(xp))
        session.assert_term(encode_transition_relation(net, x, xp))
        session.assert_term(at_generation(inv, x))
        for c in certificate.clauses:
            r = session.is_satisfiable(at_generation(negate(clause_formula(c)), xp))
            if r:
                raise CertificationError(f"clause {clause_formula(c)} is not preserved by the transitions")
            decided = decided and r is not None
        r = session.is_satisfiable(at_generation(negate(invariant), x))
        if r:
            raise CertificationError("the certificate does not imply the property")
        decided = decided and r is not None
    finally:
        if session.alive:
            session.pop()
    return decided


def prove(
    net: PetriNet,
    m0: Marking,
    invariant: Formula,
    session: SolverSession,
    budget: Optional[Budget] = None,
    *,
    scratch: Optional[SolverSession] = None,
    check_oars: bool = False,
    deadline: Optional[float] = None,
    cancel: Optional[threading.Event] = None,
) -> Verdict:
    """
    Decide AG invariant; INVARIANT verdicts are certified before they are
    returned. The session is left at the depth it was given.
    """
    base = session.depth
    session.push()
    try:
        verdict = Pdr(net, m0, invariant, session, budget, check_oars=check_oars, deadline=deadline,
                      cancel=cancel).prove()
    finally:
        while session.alive and session.depth > base:
            session.pop()
    if verdict.kind == VerdictKind.INVARIANT:
        try:
            ok = certify(net, m0, invariant, verdict.certificate, scratch or session)
        except SolverError as exc:
            return Verdict.unknown(f"certification failed to run: {exc}", method="pdr")
        if not ok:
            return Verdict.unknown("certificate could not be checked", method="pdr")
    return verdict


def pdr_with_reduction(
    net: PetriNet,
    m0: Marking,
    invariant: Formula,
    session: SolverSession,
    budget: Optional[Budget] = None,
    *,
    policy: Optional[ReductionPolicy] = None,
    trace: Optional[ReductionTrace] = None,
    scratch: Optional[SolverSession] = None,
    check_oars: bool = False,
    deadline: Optional[float] = None,
    cancel: Optional[threading.Event] = None,
) -> Verdict:
    """
    PDR on the reduced net against the E-transformed bad states. Falls back to
    the initial net when the goal or the system leaves the monotone fragment.
    """
    kw = dict(scratch=scratch, check_oars=check_oars, deadline=deadline, cancel=cancel)
    trace = trace or reduce(net, m0, policy)
    if not trace.steps:
        return prove(net, m0, invariant, session, budget, **kw)

    bad = negate(invariant)
    system = trace.system
    if not (is_syntactically_monotonic_goal(bad) and is_monotone_system(system)):
        verdict = prove(net, m0, invariant, session, budget, **kw)
        return replace(verdict, notes=verdict.notes + ("reduction skipped: outside the monotone fragment",))

    bad2 = eliminate_exists(e_transform(bad, system))
    verdict = prove(trace.final_net, trace.final_marking, negate(bad2), session, budget, **kw)
    note = "verdict transferred from the reduced net"
    if verdict.witness is not None:
        note += "; the witness fires on the reduced net"
    return replace(verdict, notes=verdict.notes + (note,))


__all__ = [
    "Certificate",
    "Pdr",
    "ProofObligation",
    "certify",
    "generalize_witness",
    "pdr_with_reduction",
    "prove",
]
