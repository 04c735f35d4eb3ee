from __future__ import annotations

import pytest

from polycheck.core.logic.formula import atom, conj, disj, evaluate, negate
from polycheck.core.logic.predicates import bounded_predicate, dead_predicate, enabled_predicate
from polycheck.core.math.linear import LinExpr
from polycheck.domain.enums import Quantifier
from polycheck.domain.exceptions import ParseError
from polycheck.domain.models import Marking
from polycheck.infrastructure.io.mcc import parse_mcc
from polycheck.infrastructure.io.pnml import parse_pnml
from polycheck.infrastructure.io.properties import parse_properties, parse_property, quote_name
from polycheck.infrastructure.io.tina import parse_net, print_net

PNML = """<?xml version="1.0" encoding="UTF-8"?>
<pnml xmlns="http://www.pnml.org/version-2009/grammar/pnml">
  <net id="demo" type="http://www.pnml.org/version-2009/grammar/ptnet">
    <name><text>Demo</text></name>
    <page id="page0">
      <place id="p"><initialMarking><text>3</text></initialMarking></place>
      <place id="q"/>
      <transition id="t"><name><text>tau</text></name></transition>
      <transition id="u"/>
      <arc id="a1" source="p" target="t"><inscription><text>2</text></inscription></arc>
      <arc id="a2" source="t" target="q"/>
      <arc id="a3" source="q" target="u"/>
    </page>
  </net>
</pnml>
"""

MCC = """<?xml version="1.0"?>
<property-set xmlns="http://mcc.lip6.fr/">
  <property>
    <id>M1-RC-00</id>
    <description>cardinality</description>
    <formula>
      <exists-path><finally>
        <integer-le>
          <integer-constant>2</integer-constant>
          <tokens-count><place>p2</place><place>p3</place></tokens-count>
        </integer-le>
      </finally></exists-path>
    </formula>
  </property>
  <property>
    <id>M1-RF-01</id>
    <formula>
      <all-paths><globally>
        <negation><is-fireable><transition>t4</transition></is-fireable></negation>
      </globally></all-paths>
    </formula>
  </property>
</property-set>
"""


# ---------------------------------------------------------
# TINA nets
# ---------------------------------------------------------
def test_parse_pipeline_net(pipeline):
    net, m0 = pipeline
    assert net.name == "M1"
    assert net.places == ("p0", "p1", "p2", "p3", "p4", "p5", "p6")
    assert net.transitions == ("t0", "t1", "t2", "t3", "t4")
    assert net.label_of("t0") == "a" and net.is_silent("t1")
    assert dict(net.post["t3"]) == {"p4": 1, "p5": 1}
    assert m0 == Marking.of(p0=5, p6=4)


def test_weights_suffixes_and_comments():
    net, m0 = parse_net("net w # comment\npl p (2K)\ntr t p*3 -> q*1M\n")
    assert m0["p"] == 2000
    assert net.pre["t"]["p"] == 3
    assert net.post["t"]["q"] == 1_000_000
    # an unlabeled transition is labeled with its own name
    assert net.label_of("t") == "t"


def test_place_lines_declare_arcs():
    net, m0 = parse_net("pl p (1) t -> u*2\n")
    assert dict(net.post["t"]) == {"p": 1}
    assert dict(net.pre["u"]) == {"p": 2}


def test_braced_names():
    net, m0 = parse_net("pl {a b} (1)\ntr {t 1} {a b} ->\n")
    assert net.places == ("a b",)
    assert net.transitions == ("t 1",)


@pytest.mark.parametrize("text", [
    "tr t p?1 -> q\n",          # read arc
    "tr t p?-1 -> q\n",         # inhibitor arc
    "tr t [0,1] p -> q\n",      # time interval
    "lb t 1\n",
    "tr t p -> q\ntr t q -> p\n",
    "bogus p\n",
    "pl p (x)\n",
])
def test_rejected_net_text(text):
    with pytest.raises(ParseError):
        parse_net(text)


def test_parse_error_position():
    with pytest.raises(ParseError) as info:
        parse_net("pl p\ntr t p -> q r -> s\n")
    assert info.value.line == 2


def test_print_then_parse_is_identity(pipeline):
    net, m0 = pipeline
    assert parse_net(print_net(net, m0)) == (net, m0)


def test_print_quotes_awkward_names():
    net, m0 = parse_net("pl {a b} (1)\ntr t : tau {a b} ->\n")
    text = print_net(net, m0)
    assert "pl {a b} (1)" in text
    assert "tr t : tau {a b} ->" in text


# ---------------------------------------------------------
# PNML
# ---------------------------------------------------------
def test_parse_pnml():
    net, m0 = parse_pnml(PNML)
    assert net.name == "Demo"
    assert net.places == ("p", "q")
    assert net.is_silent("t")
    assert net.label_of("u") == "u"
    assert dict(net.pre["t"]) == {"p": 2}
    assert dict(net.post["t"]) == {"q": 1}
    assert m0 == Marking.of(p=3)


@pytest.mark.parametrize("text", [
    "<pnml><net id='n'><place id='p'/><arc id='a' source='p' target='p'/></net></pnml>",
    "<pnml><net id='n'><place id='p'><initialMarking><text>-1</text></initialMarking></place></net></pnml>",
    "<pnml>",
    "<pnml/>",
])
def test_rejected_pnml(text):
    with pytest.raises(ParseError):
        parse_pnml(text)


# ---------------------------------------------------------
# Properties
# ---------------------------------------------------------
def test_parse_simple_property(pipeline):
    net, _ = pipeline
    quantifier, f = parse_property("EF p1 >= 2 and p3 < 1", net)
    assert quantifier == Quantifier.EF
    assert f == conj(atom("p1", ">=", 2), atom("p3", "<=", 0))


def test_parenthesized_sums_and_products(pipeline):
    net, _ = pipeline
    _, f = parse_property("AG (p0 + p1) >= 2 or 2*p6 - p0 = 3", net)
    expected = disj(
        atom(LinExpr.sum_of(["p0", "p1"]), ">=", 2),
        atom(LinExpr.var("p6", 2) - LinExpr.var("p0"), "=", 3),
    )
    assert f == expected


def test_negation_and_keywords(pipeline):
    net, _ = pipeline
    _, f = parse_property("AG not (p0 >= 1 || p6 >= 1)", net)
    assert f == conj(atom("p0", "<=", 0), atom("p6", "<=", 0))

    _, f = parse_property("EF enabled(t4) & !deadlock", net)
    assert f == conj(enabled_predicate(net, "t4"), negate(dead_predicate(net)))


def test_enabled_lists_are_disjunctions(pipeline):
    net, _ = pipeline
    _, f = parse_property("EF enabled(t1, t3)", net)
    assert f == disj(atom("p1", ">=", 1), atom("p3", ">=", 1))


def test_bounded_keyword(pipeline):
    net, m0 = pipeline
    _, f = parse_property("AG bounded(5)", net)
    assert f == bounded_predicate(net, 5)
    assert evaluate(f, m0, net.places)
    assert not evaluate(f, m0.updated({"p3": 6}), net.places)


@pytest.mark.parametrize("text, column", [
    ("EF zz >= 1", 4),
    ("EF p0 * p1 >= 1", 4),
    ("EF enabled(t9)", 12),
    ("EF bounded(x)", 12),
    ("XX p0 >= 1", 1),
    ("EF p0 >= 1 p1", 12),
])
def test_property_errors_carry_columns(pipeline, text, column):
    net, _ = pipeline
    with pytest.raises(ParseError) as info:
        parse_property(text, net)
    assert info.value.column == column, f"{info.value}"


def test_property_file(pipeline):
    net, _ = pipeline
    text = "# queries\nreach: EF p2 >= 1\n\n  AG p0 + p1 + p2 <= 5\n"
    queries = parse_properties(text, net)

    assert [q.name for q in queries] == ["reach", "q2"]
    assert [q.quantifier for q in queries] == [Quantifier.EF, Quantifier.AG]
    assert queries[0].text == "EF p2 >= 1"


def test_property_file_reports_line(pipeline):
    net, _ = pipeline
    with pytest.raises(ParseError) as info:
        parse_properties("EF p0 >= 1\nbad: EF p9 >= 1\n", net)
    assert info.value.line == 2
    assert info.value.column == 9


def test_quote_name():
    assert quote_name("p0") == "p0"
    assert quote_name("a b") == "{a b}"
    assert quote_name("and") == "{and}"


def test_quoted_names_parse_back():
    net, _ = parse_net("pl {a b} (1)\npl and\ntr t {a b} -> and\n")
    _, f = parse_property(f"EF {quote_name('a b')} + {quote_name('and')} >= 1", net)
    assert f == atom(LinExpr.sum_of(["a b", "and"]), ">=", 1)


# ---------------------------------------------------------
# MCC property files
# ---------------------------------------------------------
def test_parse_mcc(pipeline):
    net, m0 = pipeline
    queries = parse_mcc(MCC, net)

    assert [q.name for q in queries] == ["M1-RC-00", "M1-RF-01"]
    assert queries[0].text == "EF 2 <= (p2 + p3)"
    assert queries[1].text == "AG not (enabled(t4))"
    assert queries[1].quantifier == Quantifier.AG

    for m in (m0, Marking.of(p2=1, p3=1), Marking.of(p2=2)):
        assert evaluate(queries[0].formula, m, net.places) == (m["p2"] + m["p3"] >= 2)
    assert evaluate(queries[1].formula, m0, net.places)
    assert not evaluate(queries[1].formula, Marking.of(p2=1, p4=1, p5=1), net.places)


@pytest.mark.parametrize("body", [
    "<exists-path><next><integer-constant>1</integer-constant></next></exists-path>",
    "<exists-path><finally><integer-le><place-bound/><integer-constant>1</integer-constant></integer-le></finally></exists-path>",
])
def test_unsupported_mcc_formulas(pipeline, body):
    net, _ = pipeline
    text = f"<property-set><property><id>x</id><formula>{body}</formula></property></property-set>"
    with pytest.raises(ParseError):
        parse_mcc(text, net)
