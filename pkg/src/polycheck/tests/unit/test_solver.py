from __future__ import annotations

import pytest

from polycheck.core.math.linear import LinExpr
from polycheck.core.math.solver import drop_upward_free, eliminate, enumerate_solutions, first_solution
from polycheck.domain.enums import Comparator
from polycheck.domain.exceptions import UnboundedPreimageError

EQ, LE, GE = Comparator.EQ, Comparator.LE, Comparator.GE


def test_enumerate_bounded_equation():
    # x + y = 3 over the naturals
    sols = list(enumerate_solutions([({"x": 1, "y": 1}, EQ, 3)], ["x", "y"]))
    assert sorted((s["x"], s["y"]) for s in sols) == [(0, 3), (1, 2), (2, 1), (3, 0)]


def test_enumerate_with_fixed_values():
    sols = list(enumerate_solutions([({"x": 1, "y": 1}, EQ, 3)], ["x", "y"], fixed={"x": 1}))
    assert sols == [{"x": 1, "y": 2}]


def test_projection_yields_one_solution_per_key():
    # z is a witness only
    rows = [({"x": 1, "z": -1}, LE, 0), ({"z": 1}, LE, 2)]
    sols = list(enumerate_solutions(rows, ["x", "z"], project=["x"]))
    assert sorted(s["x"] for s in sols) == [0, 1, 2]


def test_unbounded_variable_raises_without_cap():
    rows = [({"x": 1, "y": -1}, EQ, 0)]
    with pytest.raises(UnboundedPreimageError) as info:
        list(enumerate_solutions(rows, ["x", "y"]))
    assert "x" in info.value.variables


def test_cap_bounds_the_search():
    rows = [({"x": 1, "y": -1}, EQ, 0)]
    sols = list(enumerate_solutions(rows, ["x", "y"], cap=2))
    assert sorted((s["x"], s["y"]) for s in sols) == [(0, 0), (1, 1), (2, 2)]


def test_upward_free_variables_are_dropped():
    rows = [({"x": 1}, GE, 3), ({"y": -1, "x": 1}, LE, 2), ({"z": 1}, LE, 4)]
    rest, left = drop_upward_free(rows, ["x", "y", "z"])
    # y first, which frees x; z has an upper bound
    assert left == ["z"]
    assert rest == [({"z": 1}, LE, 4)]


def test_infeasible_system():
    rows = [({"x": 1}, GE, 2), ({"x": 1}, LE, 1)]
    assert first_solution(rows, ["x"]) is None


def test_eliminate_unit_equality():
    elim = eliminate([({"x": 1, "y": -1, "z": -1}, EQ, 0)], ["x"])

    assert elim.eliminated == ("x",)
    assert elim.substitution["x"] == LinExpr.sum_of(["y", "z"])
    # the definition must stay nonnegative
    assert elim.residual == (({"y": 1, "z": 1}, GE, 0),)


def test_eliminate_keeps_non_unit_variables():
    elim = eliminate([({"x": 2, "y": -1}, EQ, 0)], ["x"])
    assert elim.substitution == {}
    assert len(elim.residual) == 1
