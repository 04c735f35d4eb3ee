from __future__ import annotations

import itertools

import pytest

from polycheck.core.logic.formula import (
    FALSE,
    TRUE,
    Atom,
    Or,
    atom,
    conj,
    disj,
    eliminate_exists,
    evaluate,
    exists,
    free_vars,
    is_quantifier_free,
    negate,
    to_cnf,
)
from polycheck.core.logic.predicates import (
    dead_predicate,
    enabled_predicate,
    is_syntactically_monotonic_goal,
)
from polycheck.core.math.linear import LinExpr, parse_linexpr
from polycheck.domain.enums import Comparator
from polycheck.domain.exceptions import ParseError, UnboundVariableError
from polycheck.domain.models import Marking

p, q, r = LinExpr.var("p"), LinExpr.var("q"), LinExpr.var("r")


# ---------------------------------------------------------
# Atoms
# ---------------------------------------------------------
def test_strict_comparators_are_normalized():
    assert atom("p", "<", 3) == Atom(p, Comparator.LE, 2)
    assert atom("p", ">", 3) == Atom(p, Comparator.GE, 4)


def test_constant_atoms_fold():
    assert atom(3, "<=", 5) is TRUE
    assert atom(p - p, "=", 1) is FALSE


def test_equality_orientation_is_canonical():
    assert atom("p", "=", "q") == atom("q", "=", "p")


def test_not_equal_is_a_disjunction():
    f = atom("p", "!=", 2)
    assert isinstance(f, Or)
    assert evaluate(f, {"p": 1}) and evaluate(f, {"p": 3})
    assert not evaluate(f, {"p": 2})


# ---------------------------------------------------------
# Negation normal form
# ---------------------------------------------------------
@pytest.mark.parametrize("f", [
    atom("p", "<=", 2),
    atom("p", ">=", 1),
    conj(atom("p", ">=", 1), atom("q", "<=", 0)),
    disj(atom("p", ">=", 1), conj(atom("q", ">=", 2), atom("r", "<=", 3))),
])
def test_double_negation(f):
    assert negate(negate(f)) == f


def test_negated_equality_splits():
    f = negate(atom("p", "=", 2))
    assert f == disj(atom("p", "<=", 1), atom("p", ">=", 3))


def test_negation_agrees_with_evaluation():
    f = disj(atom(p + q, ">=", 2), conj(atom("p", "=", 0), atom("r", "<", 1)))
    g = negate(f)
    for a, b, c in itertools.product(range(3), repeat=3):
        env = {"p": a, "q": b, "r": c}
        assert evaluate(g, env) == (not evaluate(f, env)), f"disagreement at {env}"


# ---------------------------------------------------------
# Evaluation
# ---------------------------------------------------------
def test_marking_reads_absent_places_as_zero():
    assert not evaluate(atom("p", ">=", 1), Marking.of(q=1))


def test_unknown_variable_with_places():
    with pytest.raises(UnboundVariableError):
        evaluate(atom("zz", ">=", 0), {}, ["p"])


def test_bounded_exists_is_decided_without_solver():
    # p is even
    even = exists(["x"], atom(LinExpr.var("x", 2), "=", "p"))
    assert evaluate(even, {"p": 4})
    assert not evaluate(even, {"p": 3})


@pytest.mark.parametrize("f, expected", [
    (exists(["a"], atom("a", ">=", 3)), True),
    (exists(["a"], atom(LinExpr.var("a") - LinExpr.var("p"), ">=", 1)), True),
    (exists(["a", "b"], conj(atom("a", ">=", 2), atom(LinExpr.var("b") - LinExpr.var("a"), ">=", 4))), True),
    (exists(["a"], conj(atom("a", ">=", 3), atom("a", "<=", 1))), False),
])
def test_one_sided_exists_is_decided_without_solver(f, expected):
    assert evaluate(f, {"p": 7}) is expected


def test_eliminate_exists_by_substitution():
    f = exists(["x"], conj(atom("x", "=", p + q), atom("x", ">=", 2)))
    g = eliminate_exists(f)

    assert is_quantifier_free(g), f"x survived: {g}"
    assert free_vars(g) == {"p", "q"}
    for a, b in itertools.product(range(4), repeat=2):
        assert evaluate(g, {"p": a, "q": b}) == (a + b >= 2)


def test_exists_drops_unused_variables():
    assert exists(["x"], atom("p", ">=", 1)) == atom("p", ">=", 1)


# ---------------------------------------------------------
# Clauses and predicates
# ---------------------------------------------------------
def test_to_cnf_distributes():
    a, b, c = atom("p", ">=", 1), atom("q", ">=", 2), atom("r", ">=", 3)
    clauses = to_cnf(disj(a, conj(b, c)))
    assert set(clauses) == {frozenset({a, b}), frozenset({a, c})}


@pytest.mark.parametrize("f, expected", [
    (atom("p", ">=", 2), True),
    (conj(atom("p", ">=", 1), disj(atom(p + q, ">=", 3), TRUE)), True),
    (atom("p", "<=", 2), False),
    (atom(p - q, ">=", 1), False),
    (atom("p", "=", 1), False),
])
def test_monotonic_goals(f, expected):
    assert is_syntactically_monotonic_goal(f) is expected


def test_enabled_and_dead_predicates(pipeline):
    net, m0 = pipeline
    assert enabled_predicate(net, "t4") == conj(atom("p2", ">=", 1), atom("p4", ">=", 1), atom("p5", ">=", 1))
    assert not evaluate(dead_predicate(net), m0, net.places)
    assert evaluate(dead_predicate(net), Marking(), net.places)


# ---------------------------------------------------------
# Linear expressions
# ---------------------------------------------------------
@pytest.mark.parametrize("text", ["3*p + q - 2", "3p+q-2", " 3 * p + q - 2 "])
def test_parse_linexpr(text):
    e = parse_linexpr(text)
    assert e == LinExpr((("p", 3), ("q", 1)), -2)
    assert e.render() == "3*p + q - 2"


def test_parse_linexpr_braced_names():
    assert parse_linexpr("{a b} + 1").variables == ("a b",)


@pytest.mark.parametrize("text", ["", "p q", "3 +"])
def test_parse_linexpr_errors(text):
    with pytest.raises(ParseError):
        parse_linexpr(text)
