from __future__ import annotations

import random

import pytest

from polycheck.checking.bmc import bmc_check, bmc_with_reduction
from polycheck.checking.oracle import check_trace, enumerate_states, explicit_check
from polycheck.checking.pdr import pdr_with_reduction, prove
from polycheck.core.config.settings import Budget, OracleCutoffs
from polycheck.core.logic.formula import evaluate, negate
from polycheck.core.net.firing import fire_sequence
from polycheck.core.reduction.reducer import reduce
from polycheck.domain.enums import AbstractionStatus, BmcStatus, Quantifier, VerdictKind
from polycheck.infrastructure.io.tina import parse_net
from polycheck.infrastructure.smt.manager import SolverContext, locate_solver
from polycheck.tests.corpus import mixed_goal, shortest_depth, upward_goal

LABELS = ("tau", "tau", "a", "b")
SEEDS = range(60)


def random_net(seed: int, n_places: int = 4, n_transitions: int = 4) -> str:
    """Small nets with plenty of silent unit moves, so that most of them reduce."""
    rng = random.Random(seed)
    lines = [f"pl p{i} ({rng.randint(0, 2)})" for i in range(n_places)]
    for j in range(n_transitions):
        label = rng.choice(LABELS)
        if label == "tau":
            src, dst = rng.sample(range(n_places), 2)
            lines.append(f"tr t{j} : tau p{src} -> p{dst}")
            continue
        pre = [f"p{i}" for i in range(n_places) if rng.random() < 0.4]
        post = [f"p{i}" if rng.random() < 0.8 else f"p{i}*2" for i in range(n_places) if rng.random() < 0.3]
        lines.append(f"tr t{j} : {label} {' '.join(pre)} -> {' '.join(post)}".rstrip())
    return "\n".join(lines) + "\n"


CUTOFFS = OracleCutoffs(max_states=5_000, max_tokens=12, obs_depth=5)


@pytest.fixture
def solver():
    if locate_solver() is None:
        pytest.skip("no SMT solver executable available")
    with SolverContext() as session:
        yield session


@pytest.mark.parametrize("seed", SEEDS)
def test_reduction_is_certified(seed):
    net, m0 = parse_net(random_net(seed))
    for r in check_trace(reduce(net, m0), CUTOFFS):
        # unbounded nets may stay inconclusive
        assert r.status != AbstractionStatus.REFUTED, f"seed {seed}: {r.witness}"


def test_most_nets_reduce():
    reduced = sum(1 for seed in SEEDS if reduce(*parse_net(random_net(seed))).steps)
    assert reduced >= len(SEEDS) // 4, f"only {reduced} of {len(SEEDS)} nets reduce"


# ---------------------------------------------------------
# EF through BMC
# ---------------------------------------------------------
@pytest.mark.parametrize("seed", SEEDS)
def test_reachability_does_not_depend_on_reductions(solver, seed):
    net, m0 = parse_net(random_net(seed))
    goal = mixed_goal(random.Random(1000 + seed), net.places)
    trace = reduce(net, m0)

    truth = shortest_depth(net, m0, goal, 8)
    plain = bmc_check(net, m0, goal, solver, Budget(max_depth=8))
    reduced = bmc_with_reduction(net, m0, goal, solver, Budget(max_depth=16), trace=trace)

    if truth is not None:
        assert plain.status == BmcStatus.REACHABLE and plain.depth == truth
        assert reduced.status == BmcStatus.REACHABLE, f"seed {seed}: lost the witness after reduction"
    if reduced.status == BmcStatus.REACHABLE:
        assert evaluate(goal, reduced.marking, net.places), f"seed {seed}: {reduced.marking.render()}"
        if reduced.trace is not None:
            assert fire_sequence(net, m0, reduced.trace) == reduced.marking
    oracle = explicit_check(enumerate_states(net, m0, CUTOFFS), Quantifier.EF, goal, net.places)
    if oracle.kind == VerdictKind.UNREACHABLE:
        assert plain.status != BmcStatus.REACHABLE
        assert reduced.status != BmcStatus.REACHABLE, f"seed {seed}: spurious witness after reduction"


# ---------------------------------------------------------
# AG through BMC and PDR
# ---------------------------------------------------------
@pytest.mark.parametrize("seed", SEEDS)
def test_invariants_do_not_depend_on_reductions(solver, seed):
    net, m0 = parse_net(random_net(seed))
    invariant = negate(upward_goal(random.Random(2000 + seed), net.places))
    trace = reduce(net, m0)
    budget = Budget(max_depth=16, wall_clock_s=60)

    plain = prove(net, m0, invariant, solver, budget)
    reduced = pdr_with_reduction(net, m0, invariant, solver, budget, trace=trace)
    violation = bmc_with_reduction(net, m0, negate(invariant), solver, budget, trace=trace)

    assert plain.kind in (VerdictKind.INVARIANT, VerdictKind.NOT_INVARIANT), f"seed {seed}: {plain.reason}"
    assert reduced.kind == plain.kind, (
        f"seed {seed}: reduced {reduced.kind.value} ({reduced.reason}) vs plain {plain.kind.value}; "
        f"rules {[s.rule.value for s in trace.steps]}"
    )
    if plain.kind == VerdictKind.INVARIANT:
        assert violation.status != BmcStatus.REACHABLE, f"seed {seed}: bmc violates a proved invariant"
    else:
        assert not evaluate(invariant, fire_sequence(net, m0, plain.witness), net.places)
    oracle = explicit_check(enumerate_states(net, m0, CUTOFFS), Quantifier.AG, invariant, net.places)
    if oracle.kind != VerdictKind.UNKNOWN:
        assert plain.kind == oracle.kind, f"seed {seed}: pdr {plain.kind.value} vs {oracle.kind.value}"
