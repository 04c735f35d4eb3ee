from __future__ import annotations

import pytest

from polycheck.infrastructure.io.tina import parse_net
from polycheck.infrastructure.smt.manager import SolverContext, locate_solver

# Two concurrent activities: a producer feeding an a/tau/tau/c pipeline and
# an independent b counter.
PIPELINE_NET = """\
net M1
pl p0 (5)
pl p1
pl p2
pl p3
pl p4
pl p5
pl p6 (4)
tr t0 : a p0 -> p1 p3
tr t1 : tau p1 -> p2
tr t2 : b p6 ->
tr t3 : tau p3 -> p4 p5
tr t4 : c p2 p4 p5 ->
"""


@pytest.fixture
def pipeline_text() -> str:
    return PIPELINE_NET


@pytest.fixture
def pipeline():
    """(net, initial marking) of the pipeline net."""
    return parse_net(PIPELINE_NET)


@pytest.fixture
def session():
    if locate_solver() is None:
        pytest.skip("no SMT solver executable available")
    with SolverContext() as s:
        yield s


@pytest.fixture
def scratch():
    if locate_solver() is None:
        pytest.skip("no SMT solver executable available")
    with SolverContext() as s:
        yield s
