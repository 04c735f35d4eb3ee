from __future__ import annotations

import random
import threading

import pytest

from polycheck.checking import bmc as bmc_module
from polycheck.checking.bmc import bmc_check, bmc_with_reduction, lift_witness
from polycheck.core.abstraction.transform import is_compatible
from polycheck.core.config.settings import Budget
from polycheck.core.logic.formula import atom, evaluate
from polycheck.core.net.firing import fire_sequence
from polycheck.core.reduction.reducer import reduce
from polycheck.domain.enums import BmcStatus, SatStatus
from polycheck.domain.exceptions import UndecidedError, WitnessLiftError
from polycheck.infrastructure.io.tina import parse_net
from polycheck.infrastructure.smt.session import SatResult
from polycheck.tests.corpus import mixed_goal, random_net, shortest_depth

TOGGLE = "pl p (1)\npl q\ntr t p -> q\ntr u q -> p\n"
REDUCIBLE = "pl c (2)\npl s (3)\ntr t c -> c\ntr d : tau s ->\n"


# ---------------------------------------------------------
# Plain BMC
# ---------------------------------------------------------
def test_reaches_goal_at_shortest_depth(pipeline, session):
    net, m0 = pipeline
    goal = atom("p2", ">=", 1)
    out = bmc_check(net, m0, goal, session)

    assert out.status == BmcStatus.REACHABLE
    assert out.depth == 2
    assert list(out.trace) == ["t0", "t1"]
    assert fire_sequence(net, m0, out.trace) == out.marking
    assert evaluate(goal, out.marking, net.places)


def test_goal_holding_initially(pipeline, session):
    net, m0 = pipeline
    out = bmc_check(net, m0, atom("p0", ">=", 5), session)
    assert out.status == BmcStatus.REACHABLE and out.depth == 0
    assert len(out.trace) == 0


def test_depth_bound_gives_unknown(pipeline, session):
    net, m0 = pipeline
    out = bmc_check(net, m0, atom("p6", ">=", 5), session, Budget(max_depth=3))
    assert out.status == BmcStatus.UNKNOWN
    assert out.reason == "depth"
    assert out.iterations == 3


def test_fixpoint_check_exhausts_small_nets(session):
    net, m0 = parse_net(TOGGLE)
    out = bmc_check(net, m0, atom("q", ">=", 2), session, fixpoint_check=True)
    # two reachable markings: no loop-free path of length 2
    assert out.status == BmcStatus.EXHAUSTED
    assert out.depth == 2


def test_cancelled_search(pipeline, session):
    net, m0 = pipeline
    cancel = threading.Event()
    cancel.set()
    out = bmc_check(net, m0, atom("p6", ">=", 5), session, cancel=cancel)
    assert out.status == BmcStatus.UNKNOWN and out.reason == "cancelled"


def test_session_is_reusable_across_nets(session):
    shrink, s0 = parse_net("pl p (1)\ntr t p ->\n")
    grow, g0 = parse_net("pl p (1)\ntr t p -> p*2\n")

    assert bmc_check(shrink, s0, atom("p", ">=", 3), session, Budget(max_depth=3)).status == BmcStatus.UNKNOWN
    assert session.depth == 0
    out = bmc_check(grow, g0, atom("p", ">=", 3), session, Budget(max_depth=3))
    assert out.status == BmcStatus.REACHABLE and out.depth == 2


@pytest.mark.parametrize("seed", range(200))
def test_depths_match_breadth_first_search(session, seed):
    rng = random.Random(seed)
    net, m0 = parse_net(random_net(rng))
    goal = mixed_goal(rng, net.places)

    expected = shortest_depth(net, m0, goal, 6)
    out = bmc_check(net, m0, goal, session, Budget(max_depth=6))

    if expected is None:
        assert out.status != BmcStatus.REACHABLE, f"seed {seed}: bmc found {out.trace}"
    else:
        assert out.status == BmcStatus.REACHABLE, f"seed {seed}: {out.status.value} {out.reason}"
        assert out.depth == expected, f"seed {seed}: bmc {out.depth} vs bfs {expected}"
        assert fire_sequence(net, m0, out.trace) == out.marking
        assert evaluate(goal, out.marking, net.places)


# ---------------------------------------------------------
# BMC on the reduced net
# ---------------------------------------------------------
def test_reduced_witness_is_lifted(pipeline, session):
    net, m0 = pipeline
    trace = reduce(net, m0)
    goal = atom("p5", ">=", 2)

    out = bmc_with_reduction(net, m0, goal, session, trace=trace)

    assert out.status == BmcStatus.REACHABLE
    # the reduced net skips both silent steps of each token
    assert out.depth == 2
    assert evaluate(goal, out.marking, net.places)
    assert is_compatible(trace.system, out.marking, out.reduced_marking)
    assert fire_sequence(trace.final_net, trace.final_marking, out.reduced_trace) == out.reduced_marking
    # the initial-net sequence also fires the silent steps
    assert out.trace is not None and len(out.trace) >= out.depth
    assert fire_sequence(net, m0, out.trace) == out.marking
    assert out.notes


def test_fully_reduced_net_is_exhausted_at_once(session):
    net, m0 = parse_net(REDUCIBLE)
    out = bmc_with_reduction(net, m0, atom("c", ">=", 3), session)
    assert out.status == BmcStatus.EXHAUSTED
    assert out.depth == 0 and out.iterations == 0


def test_fully_reduced_net_lifts_a_marking(session):
    net, m0 = parse_net(REDUCIBLE)
    goal = atom("s", "<=", 1)
    out = bmc_with_reduction(net, m0, goal, session)
    assert out.status == BmcStatus.REACHABLE
    assert out.marking["c"] == 2
    assert evaluate(goal, out.marking, net.places)
    assert fire_sequence(net, m0, out.trace) == out.marking


def test_irreducible_net_falls_back(session):
    net, m0 = parse_net(TOGGLE)
    out = bmc_with_reduction(net, m0, atom("q", ">=", 1), session)
    assert out.status == BmcStatus.REACHABLE
    assert list(out.trace) == ["t"]


class _UndecidedSession:
    """Answers unknown to every query."""

    depth = 0
    alive = True

    def push(self):
        self.depth += 1

    def pop(self):
        self.depth -= 1

    def assert_term(self, term, label=None):
        return None

    def check_sat(self):
        return SatResult(SatStatus.UNKNOWN, "timeout")


def test_undecided_lift_is_not_a_lift_failure(pipeline):
    net, m0 = pipeline
    trace = reduce(net, m0)

    with pytest.raises(UndecidedError) as info:
        lift_witness(trace, trace.final_marking, atom("p5", ">=", 0), _UndecidedSession())
    assert info.value.reason == "timeout"
    assert not isinstance(info.value, WitnessLiftError)


def test_undecided_lift_gives_unknown(pipeline, session, monkeypatch):
    net, m0 = pipeline

    def undecided(*args, **kw):
        raise UndecidedError("lifting", "timeout")

    monkeypatch.setattr(bmc_module, "lift_witness", undecided)
    out = bmc_with_reduction(net, m0, atom("p5", ">=", 2), session)

    assert out.status == BmcStatus.UNKNOWN
    assert out.reason == "witness lift: timeout"
    assert out.reduced_trace is not None
