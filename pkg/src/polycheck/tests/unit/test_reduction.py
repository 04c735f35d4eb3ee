from __future__ import annotations

from fractions import Fraction

import pytest

from polycheck.core.abstraction.transform import count_preimage, is_compatible, is_monotone_system
from polycheck.core.config.settings import ReductionPolicy
from polycheck.core.reduction.reducer import reduce, reduction_ratio, render_system
from polycheck.core.reduction.rules import RULES, FreshNames, try_constant_source, try_redundant_place
from polycheck.domain.enums import RuleId
from polycheck.domain.models import Marking
from polycheck.infrastructure.io.tina import parse_net


def _apply(rule: RuleId, text: str):
    net, m0 = parse_net(text)
    step = RULES[rule](net, m0, FreshNames(net.places + net.transitions))
    assert step is not None, f"{rule.value} did not match"
    return step


# ---------------------------------------------------------
# Running example
# ---------------------------------------------------------
def test_pipeline_net_trace(pipeline):
    net, m0 = pipeline
    trace = reduce(net, m0)

    rules = [s.rule for s in trace.steps]
    assert rules == [RuleId.RED, RuleId.CONCAT, RuleId.CONCAT, RuleId.RED], f"got {rules}"
    assert [c.render() for c in trace.equations] == [
        "p5 = p4",
        "a1 = p1 + p2",
        "a2 = p3 + p4",
        "a1 = a2",
    ]
    assert trace.final_net.places == ("a2", "p0", "p6")
    assert trace.final_net.transitions == ("t0", "t2", "t4")
    assert dict(trace.final_net.post["t0"]) == {"a2": 1}
    assert dict(trace.final_net.pre["t4"]) == {"a2": 1}
    assert trace.final_marking == Marking.of(p0=5, p6=4)
    assert not trace.truncated


def test_pipeline_net_system(pipeline):
    net, m0 = pipeline
    trace = reduce(net, m0)
    system = trace.system

    assert system.fresh == ("a1",)
    assert render_system(trace).splitlines()[0] == "p5 = p4"
    assert reduction_ratio(trace) == Fraction(4, 7)
    assert is_monotone_system(system)
    assert is_compatible(system, m0, trace.final_marking)


def test_replay_and_preimage(pipeline):
    net, m0 = pipeline
    trace = reduce(net, m0)
    m1 = Marking.of(p0=3, p2=1, p3=1, p6=3)

    m2 = trace.replay(m1)

    assert m2 == Marking.of(a2=1, p0=3, p6=3)
    assert is_compatible(trace.system, m1, m2)
    # one token in each of the two merged pipelines
    assert count_preimage(trace.system, m2) == 4


def test_policy_can_disable_rules(pipeline):
    net, m0 = pipeline
    trace = reduce(net, m0, ReductionPolicy(enabled_rules=(RuleId.CONCAT,)))
    assert [s.rule for s in trace.steps] == [RuleId.CONCAT, RuleId.CONCAT]


def test_step_cap_truncates(pipeline):
    net, m0 = pipeline
    trace = reduce(net, m0, ReductionPolicy(max_steps=1))
    assert trace.truncated and len(trace.steps) == 1


def test_fully_reducible_net():
    net, m0 = parse_net("pl c (2)\npl s (3)\ntr t c -> c\ntr d : tau s ->\n")
    trace = reduce(net, m0)

    assert [s.rule for s in trace.steps] == [RuleId.CONSTANT, RuleId.SOURCE]
    assert trace.final_net.places == ()
    assert reduction_ratio(trace) == 1
    assert render_system(trace) == "c = 2\ns <= 3"


def test_irreducible_net_keeps_everything():
    net, m0 = parse_net("pl p (1)\npl q\ntr t : a p -> q\ntr u : b q -> p\n")
    trace = reduce(net, m0)
    assert trace.steps == ()
    assert reduction_ratio(trace) == 0
    assert trace.final_net == net


# ---------------------------------------------------------
# One instance per rule
# ---------------------------------------------------------
def test_dead_transition():
    step = _apply(RuleId.DEADT, "pl p (1)\npl q\ntr t p*2 -> q\ntr u p -> q\n")
    assert step.removed_transitions == ("t",)
    assert step.equations == ()


@pytest.mark.parametrize("text, removed", [
    ("pl p (1)\npl q\ntr t : a p -> q\ntr u : a p -> q\n", "u"),          # duplicate
    ("pl p (1)\ntr t : tau p -> p\n", "t"),                                # silent no-op
    ("pl p (1)\npl q\npl r\ntr t1 : tau p -> q\ntr t2 : tau q -> r\ntr t : tau p -> r\n", "t"),
])
def test_redundant_transition(text, removed):
    step = _apply(RuleId.REDT, text)
    assert step.removed_transitions == (removed,)


def test_constant_place():
    step = _apply(RuleId.CONSTANT, "pl p (2)\npl q\ntr t p -> p q\n")
    assert [c.render() for c in step.equations] == ["p = 2"]
    assert step.net_after.places == ("q",)


def test_source_place():
    step = _apply(RuleId.SOURCE, "pl p (3)\npl q (1)\ntr d : tau p ->\ntr t q -> q\n")
    assert [c.render() for c in step.equations] == ["p <= 3"]
    assert step.removed_places == ("p",)
    assert step.removed_transitions == ("d",)


def test_redundant_place_keeps_the_smaller():
    step = _apply(RuleId.RED, "pl y (1)\npl z (3)\ntr t -> y z\ntr u y z ->\n")
    assert [c.render() for c in step.equations] == ["z = y + 2"]
    assert step.net_after.places == ("y",)


def test_shortcut():
    text = "pl y1 (1)\npl y2\npl z (2)\ntr t -> y1 z\ntr u -> y2 z\ntr v y1 y2 z*2 ->\n"
    step = _apply(RuleId.SHORTCUT, text)
    assert [c.render() for c in step.equations] == ["z = y1 + y2 + 1"]
    assert step.removed_places == ("z",)


@pytest.mark.parametrize("matcher, text, rule, equation", [
    (try_redundant_place, "pl y (1)\npl z (3)\ntr t -> y z\ntr u y z ->\n", RuleId.RED, "z = y + 2"),
    (try_redundant_place, "pl y1 (1)\npl y2\npl z (2)\ntr t -> y1 z\ntr u -> y2 z\ntr v y1 y2 z*2 ->\n",
     RuleId.SHORTCUT, "z = y1 + y2 + 1"),
    (try_constant_source, "pl p (2)\npl q\ntr t p -> p q\n", RuleId.CONSTANT, "p = 2"),
    (try_constant_source, "pl p (3)\npl q (1)\ntr d : tau p ->\ntr t q ->\n", RuleId.SOURCE, "p <= 3"),
])
def test_grouped_matchers(matcher, text, rule, equation):
    net, m0 = parse_net(text)
    step = matcher(net, m0, FreshNames(net.places + net.transitions))
    assert step is not None and step.rule == rule
    assert [c.render() for c in step.equations] == [equation]


@pytest.mark.parametrize("matcher, text", [
    # z gains a token on u that y does not
    (try_redundant_place, "pl y (1)\npl z (3)\ntr t -> y z\ntr u y -> z\n"),
    (try_constant_source, "pl p (2)\npl q\ntr t p -> q\n"),
])
def test_grouped_matchers_without_a_match(matcher, text):
    net, m0 = parse_net(text)
    assert matcher(net, m0, FreshNames(net.places + net.transitions)) is None


def test_concat():
    text = "pl y1 (2)\npl y2\npl s (1)\ntr a s -> y1\ntr t : tau y1 -> y2\ntr b y2 -> s\n"
    step = _apply(RuleId.CONCAT, text)

    assert [c.render() for c in step.equations] == ["a1 = y1 + y2"]
    assert step.fresh_vars == ("a1",)
    assert step.net_after.places == ("a1", "s")
    assert step.net_after.transitions == ("a", "b")
    assert dict(step.net_after.post["a"]) == {"a1": 1}
    assert dict(step.net_after.pre["b"]) == {"a1": 1}
    assert step.marking_after == Marking.of(a1=2, s=1)


def test_concat_needs_empty_target():
    net, m0 = parse_net("pl y1 (2)\npl y2 (1)\ntr t : tau y1 -> y2\ntr b y2 ->\n")
    assert RULES[RuleId.CONCAT](net, m0, FreshNames(net.places)) is None


def test_agg():
    text = "pl y1 (1)\npl y2 (2)\ntr f : tau y1 -> y2\ntr g : tau y2 -> y1\ntr o y1 ->\n"
    step = _apply(RuleId.AGG, text)

    assert [c.render() for c in step.equations] == ["a1 = y1 + y2"]
    assert step.net_after.transitions == ("o",)
    assert step.marking_after == Marking.of(a1=3)


def test_fresh_names_skip_taken():
    names = FreshNames(["a1", "a3"])
    assert [names.next(), names.next(), names.next()] == ["a2", "a4", "a5"]
