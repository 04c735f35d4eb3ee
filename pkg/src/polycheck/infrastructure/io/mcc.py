"""
Model Checking Contest property files (ReachabilityCardinality and
ReachabilityFireability). Each XML formula is spelled in the textual property
grammar and parsed from there.
"""
from __future__ import annotations

import xml.etree.ElementTree as ET
from typing import List, Optional

from polycheck.domain.exceptions import ParseError
from polycheck.domain.models import PetriNet

from .properties import NamedQuery, parse_property, quote_name


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _children(el: ET.Element) -> List[ET.Element]:
    return [c for c in el if isinstance(c.tag, str)]


def _single(el: ET.Element) -> ET.Element:
    kids = _children(el)
    if len(kids) != 1:
        raise ParseError(f"<{_local(el.tag)}> expects one operand, found {len(kids)}")
    return kids[0]


def _int_text(el: ET.Element) -> str:
    kind = _local(el.tag)
    if kind == "integer-constant":
        return str(int((el.text or "").strip()))
    if kind == "tokens-count":
        places = [quote_name((c.text or "").strip()) for c in _children(el) if _local(c.tag) == "place"]
        if not places:
            return "0"
        return "(" + " + ".join(places) + ")" if len(places) > 1 else places[0]
    if kind == "integer-sum":
        return "(" + " + ".join(_int_text(c) for c in _children(el)) + ")"
    raise ParseError(f"unsupported integer expression <{kind}>")


def _bool_text(el: ET.Element) -> str:
    kind = _local(el.tag)
    kids = _children(el)
    if kind in ("true", "false"):
        return kind
    if kind == "integer-le":
        if len(kids) != 2:
            raise ParseError("<integer-le> expects two operands")
        return f"{_int_text(kids[0])} <= {_int_text(kids[1])}"
    if kind == "is-fireable":
        names = [quote_name((c.text or "").strip()) for c in kids if _local(c.tag) == "transition"]
        if not names:
            return "false"
        return f"enabled({', '.join(names)})"
    if kind == "negation":
        return f"not ({_bool_text(_single(el))})"
    if kind in ("conjunction", "disjunction"):
        if not kids:
            return "true" if kind == "conjunction" else "false"
        op = " and " if kind == "conjunction" else " or "
        return op.join(f"({_bool_text(c)})" for c in kids)
    raise ParseError(f"unsupported formula element <{kind}>")


def formula_text(formula_el: ET.Element) -> str:
    """`EF ...` / `AG ...` text for the body of an MCC <formula> element."""
    top = _single(formula_el)
    path = _local(top.tag)
    inner = _single(top)
    temporal = _local(inner.tag)
    if path == "exists-path" and temporal == "finally":
        return f"EF {_bool_text(_single(inner))}"
    if path == "all-paths" and temporal == "globally":
        return f"AG {_bool_text(_single(inner))}"
    raise ParseError(f"unsupported path formula <{path}>/<{temporal}>")


def parse_mcc(text: str, net: Optional[PetriNet] = None) -> List[NamedQuery]:
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        line, col = getattr(exc, "position", (0, 0))
        raise ParseError(f"malformed XML: {exc}", line, col) from exc

    out: List[NamedQuery] = []
    for prop in (e for e in root.iter() if _local(e.tag) == "property"):
        ident = next((c for c in prop if _local(c.tag) == "id"), None)
        formula = next((c for c in prop if _local(c.tag) == "formula"), None)
        if formula is None:
            raise ParseError("property without <formula>")
        name = (ident.text or "").strip() if ident is not None else f"q{len(out) + 1}"
        body = formula_text(formula)
        quantifier, f = parse_property(body, net)
        out.append(NamedQuery(name, quantifier, f, body))
    return out


__all__ = ["formula_text", "parse_mcc"]
