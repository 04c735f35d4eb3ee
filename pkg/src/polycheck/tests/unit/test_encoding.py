from __future__ import annotations

import itertools
import random

import pytest

from polycheck.core.logic.formula import atom, evaluate, exists, free_vars, negate
from polycheck.core.math.linear import LinExpr
from polycheck.core.net.firing import fire, is_enabled, successors
from polycheck.domain.exceptions import EncodingError, ProtocolError
from polycheck.domain.models import Marking
from polycheck.infrastructure.io.tina import parse_net
from polycheck.infrastructure.smt.encoding import (
    Assert,
    DeclareConst,
    GenerationCounter,
    Pop,
    Push,
    SetOption,
    decode_step,
    delta,
    encode_fire,
    encode_transition_relation,
    script,
    serialize,
    skolemize,
    stutter,
    symbol,
    term_text,
    unroll,
)
from polycheck.infrastructure.smt.session import parse_sexpr

SMALL = "pl p (1)\npl q\ntr t p -> q\ntr u q*2 -> p\n"


def _gens(places, n=2):
    counter = GenerationCounter(places)
    return [counter.fresh_generation() for _ in range(n)]


# ---------------------------------------------------------
# Terms
# ---------------------------------------------------------
def test_generation_names():
    x, x1 = _gens(("p", "q"))
    assert x.names == ("x0_p", "x0_q")
    assert x1["q"] == "x1_q"


def test_stutter_text():
    x, x1 = _gens(("p",))
    assert term_text(stutter(x, x1)) == "(= x0_p x1_p)"


def test_delta_and_enabling_text():
    net, _ = parse_net("pl p\ntr t p ->\n")
    x, x1 = _gens(net.places)
    assert term_text(delta(net, "t", x, x1)) == "(= x0_p (+ x1_p 1))"
    assert term_text(encode_fire(net, "t", x, x1)) == "(and (>= x0_p 1) (= x0_p (+ x1_p 1)))"


def test_constant_sides():
    assert term_text(atom("p", ">=", 1)) == "(>= p 1)"
    assert term_text(atom("p", "<=", -2)) == "(<= (+ p 2) 0)"


def test_negative_coefficients_move_right():
    f = atom(LinExpr.var("p", 3) - LinExpr.var("q"), ">=", 0)
    assert term_text(f) == "(>= (* 3 p) q)"


@pytest.mark.parametrize("name, expected", [
    ("p1", "p1"),
    ("p.1@x", "p.1@x"),
    ("a b", "|a b|"),
    ("and", "|and|"),
    ("1p", "|1p|"),
])
def test_symbols(name, expected):
    assert symbol(name) == expected


def test_unquotable_symbol():
    with pytest.raises(EncodingError):
        symbol("a|b")


def test_commands():
    commands = [
        SetOption("produce-models", True),
        DeclareConst("p"),
        Push(),
        Assert(atom("p", ">=", 1), "g1"),
        Pop(),
    ]
    assert script(commands) == (
        "(set-option :produce-models true)\n"
        "(declare-const p Int)\n"
        "(push 1)\n"
        "(assert (! (>= p 1) :named g1))\n"
        "(pop 1)\n"
    )


# ---------------------------------------------------------
# Quantifiers
# ---------------------------------------------------------
def test_skolemize_positive_exists():
    f = exists(["y"], atom("y", "=", "p"))
    body, introduced = skolemize(f, lambda v: f"sk_{v}")
    assert introduced == ("sk_y",)
    assert free_vars(body) == {"p", "sk_y"}


def test_skolemize_rejects_negated_exists():
    f = negate(exists(["y"], atom("y", "=", "p")))
    with pytest.raises(EncodingError):
        skolemize(f, lambda v: f"sk_{v}")


def test_quantified_terms_need_skolemizing():
    with pytest.raises(EncodingError):
        term_text(exists(["y"], atom("y", "=", "p")))


# ---------------------------------------------------------
# Semantics
# ---------------------------------------------------------
def test_transition_relation_matches_firing():
    net, _ = parse_net(SMALL)
    x, x1 = _gens(net.places)
    rel = encode_transition_relation(net, x, x1)
    box = [Marking.of(p=a, q=b) for a, b in itertools.product(range(3), repeat=2)]

    for m, m1 in itertools.product(box, repeat=2):
        env = {x[p]: m[p] for p in net.places}
        env.update({x1[p]: m1[p] for p in net.places})
        expected = m == m1 or any(is_enabled(net, m, t) and fire(net, m, t) == m1 for t in net.transitions)
        assert evaluate(rel, env) == expected, f"{m.render()} -> {m1.render()}"


def test_unroll_generations(pipeline):
    net, m0 = pipeline
    f, gens = unroll(net, m0, 2)
    assert [g.generation for g in gens] == [0, 1, 2]
    assert "x2_p6" in free_vars(f)


def _vectors(n):
    vectors = itertools.product(range(3), repeat=n)
    if n < 3:
        return list(vectors)
    # single-arc rows only on three places
    return [v for v in vectors if sum(1 for w in v if w) <= 1]


def _arcs(places, weights):
    return " ".join(p if w == 1 else f"{p}*{w}" for p, w in zip(places, weights) if w)


def _single_transition_nets():
    for n in (1, 2, 3):
        places = [f"p{i}" for i in range(n)]
        for pre, post in itertools.product(_vectors(n), repeat=2):
            if any(pre) or any(post):
                lines = [f"pl {p}" for p in places] + [f"tr t {_arcs(places, pre)} -> {_arcs(places, post)}"]
                yield "\n".join(lines) + "\n"


@pytest.mark.parametrize("text", list(_single_transition_nets()))
def test_transition_relation_is_exact_on_small_nets(text):
    net, _ = parse_net(text)
    x, x1 = _gens(net.places)
    rel = encode_transition_relation(net, x, x1)

    for before in itertools.product(range(3), repeat=len(net.places)):
        m = Marking.of(dict(zip(net.places, before)))
        env = {x[p]: m[p] for p in net.places}
        for after in itertools.product(range(5), repeat=len(net.places)):
            m1 = Marking.of(dict(zip(net.places, after)))
            env.update({x1[p]: m1[p] for p in net.places})
            expected = m == m1 or (is_enabled(net, m, "t") and fire(net, m, "t") == m1)
            assert evaluate(rel, env) == expected, f"{m.render()} -> {m1.render()}"


def _padded_paths(net, m0, k):
    """Every firing path of length <= k, padded to k + 1 markings by repeating the last one."""
    frontier = [[m0]]
    for _ in range(k):
        frontier = [path + [m1] for path in frontier for _, m1 in successors(net, path[-1])] + \
                   [path + [path[-1]] for path in frontier]
    return frontier


@pytest.mark.parametrize("text", [
    SMALL,
    "pl p (2)\npl q\npl r (1)\ntr t p*2 -> q\ntr u q r -> p r*2\ntr v r -> \n",
    "pl p (1)\npl q (2)\ntr t p -> p*2\ntr u q*2 -> p\n",
])
@pytest.mark.parametrize("k", range(5))
def test_unroll_admits_every_path(text, k):
    net, m0 = parse_net(text)
    f, gens = unroll(net, m0, k)

    for path in _padded_paths(net, m0, k):
        env = {g[p]: m[p] for g, m in zip(gens, path) for p in net.places}
        assert evaluate(f, env), " -> ".join(m.render() for m in path)
    if k:
        # no transition adds fifty tokens in one step
        env = {g[p]: m0[p] for g in gens for p in net.places}
        env[gens[-1][net.places[0]]] += 50
        assert not evaluate(f, env)


def test_encoding_size_stays_linear():
    rng = random.Random(100)
    places = [f"p{i}" for i in range(100)]
    lines = [f"pl {p} ({rng.randint(0, 2)})" for p in places]
    for j in range(100):
        pre = {p: rng.randint(1, 2) for p in rng.sample(places, rng.randint(1, 3))}
        post = {p: rng.randint(1, 2) for p in rng.sample(places, rng.randint(1, 3))}
        lines.append(f"tr t{j} {_arcs(pre, pre.values())} -> {_arcs(post, post.values())}")
    net, m0 = parse_net("\n".join(lines) + "\n")

    f, _ = unroll(net, m0, 1)
    text = serialize(Assert(f))
    size = sum(len(net.pre_of(t)) + len(net.places) for t in net.transitions)

    assert len(text) <= 30 * size + 60 * len(net.places), f"{len(text)} bytes for size {size}"
    assert len(text) < 400_000


def test_decode_step(pipeline):
    net, m0 = pipeline
    assert decode_step(net, m0, fire(net, m0, "t2")) == "t2"
    assert decode_step(net, m0, m0) is None
    with pytest.raises(EncodingError):
        decode_step(net, m0, Marking.of(p6=9))


# ---------------------------------------------------------
# Responses
# ---------------------------------------------------------
def test_parse_sexpr():
    tree = parse_sexpr("((x0_p 3) (|a b| (- 2)))")
    assert tree == [["x0_p", "3"], ["|a b|", ["-", "2"]]]


@pytest.mark.parametrize("text", ["(a b", "a)", "(a) (b)"])
def test_parse_sexpr_errors(text):
    with pytest.raises(ProtocolError):
        parse_sexpr(text)
