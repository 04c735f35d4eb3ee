"""PNML reader for place/transition nets (first page structure flattened)."""
from __future__ import annotations

import xml.etree.ElementTree as ET
from typing import Dict, Optional, Tuple

from polycheck.domain.exceptions import NetError, ParseError
from polycheck.domain.models import Marking, PetriNet


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _child(el: ET.Element, name: str) -> Optional[ET.Element]:
    for c in el:
        if _local(c.tag) == name:
            return c
    return None


def _text(el: ET.Element, name: str) -> Optional[str]:
    """<el><name><text>...</text></name></el> -> stripped text."""
    node = _child(el, name)
    if node is None:
        return None
    text = _child(node, "text")
    if text is None or text.text is None:
        return None
    return text.text.strip()


def _int(value: Optional[str], default: int, where: str) -> int:
    if value is None or value == "":
        return default
    try:
        n = int(value)
    except ValueError:
        raise ParseError(f"{where}: expected an integer, got {value!r}") from None
    if n < 0:
        raise ParseError(f"{where}: negative value {n}")
    return n


def parse_pnml(text: str) -> Tuple[PetriNet, Marking]:
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        line, col = getattr(exc, "position", (0, 0))
        raise ParseError(f"malformed XML: {exc}", line, col) from exc

    net_el = next((e for e in root.iter() if _local(e.tag) == "net"), None)
    if net_el is None:
        raise ParseError("no <net> element")
    name = _text(net_el, "name") or net_el.get("id") or "net"

    places: Dict[str, int] = {}
    labels: Dict[str, str] = {}
    transitions: Dict[str, None] = {}
    arcs = []
    for el in net_el.iter():
        kind = _local(el.tag)
        ident = el.get("id")
        if kind == "place":
            if ident is None:
                raise ParseError("place without id")
            places[ident] = _int(_text(el, "initialMarking"), 0, f"place {ident}")
        elif kind == "transition":
            if ident is None:
                raise ParseError("transition without id")
            transitions[ident] = None
            label = _text(el, "name")
            if label:
                labels[ident] = label
        elif kind == "arc":
            src, dst = el.get("source"), el.get("target")
            if src is None or dst is None:
                raise ParseError(f"arc {ident} lacks source or target")
            arcs.append((src, dst, _int(_text(el, "inscription"), 1, f"arc {ident}")))

    pre: Dict[str, Dict[str, int]] = {t: {} for t in transitions}
    post: Dict[str, Dict[str, int]] = {t: {} for t in transitions}
    for src, dst, w in arcs:
        if src in places and dst in transitions:
            pre[dst][src] = pre[dst].get(src, 0) + w
        elif src in transitions and dst in places:
            post[src][dst] = post[src].get(dst, 0) + w
        else:
            raise ParseError(f"arc {src} -> {dst} does not join a place and a transition")
    try:
        net = PetriNet(tuple(places), tuple(transitions), pre, post, labels, name=name)
    except NetError as exc:
        raise ParseError(str(exc)) from exc
    return net, Marking.of(places)


__all__ = ["parse_pnml"]
