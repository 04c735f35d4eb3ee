"""Concrete firing semantics and marking algebra."""
from __future__ import annotations

from typing import Dict, Iterable, Iterator, Mapping, Tuple

from polycheck.domain.exceptions import (
    IncompatibleMarkingsError,
    SequenceNotFireableError,
    TransitionNotEnabledError,
)
from polycheck.domain.models import TAU, Marking, ObservationSequence, PetriNet


def is_enabled(net: PetriNet, m: Mapping[str, int], t: str) -> bool:
    return all(m.get(p, 0) >= w for p, w in net.pre_of(t).items())


def incidence(net: PetriNet, t: str) -> Dict[str, int]:
    """Effect of t: Post(t) - Pre(t), zero entries dropped."""
    delta: Dict[str, int] = {}
    for p, w in net.pre_of(t).items():
        delta[p] = delta.get(p, 0) - w
    for p, w in net.post_of(t).items():
        delta[p] = delta.get(p, 0) + w
    return {p: d for p, d in delta.items() if d}


def fire(net: PetriNet, m: Marking, t: str) -> Marking:
    for p in net.places:
        need = net.pre_of(t).get(p, 0)
        if need and m.get(p, 0) < need:
            raise TransitionNotEnabledError(t, p, need, m.get(p, 0))
    changes = {p: m.get(p, 0) + d for p, d in incidence(net, t).items()}
    return m.updated(changes)


def fire_sequence(net: PetriNet, m: Marking, seq: Iterable[str]) -> Marking:
    cur = m
    for i, t in enumerate(seq):
        try:
            cur = fire(net, cur, t)
        except TransitionNotEnabledError as exc:
            raise SequenceNotFireableError(i, t, exc) from exc
    return cur


def observe(net: PetriNet, seq: Iterable[str]) -> ObservationSequence:
    labels = (net.label_of(t) for t in seq)
    return ObservationSequence(tuple(a for a in labels if a != TAU))


def enabled_transitions(net: PetriNet, m: Mapping[str, int]) -> Tuple[str, ...]:
    return tuple(t for t in net.transitions if is_enabled(net, m, t))


def successors(net: PetriNet, m: Marking) -> Iterator[Tuple[str, Marking]]:
    for t in enabled_transitions(net, m):
        yield t, fire(net, m, t)


def covers(m1: Mapping[str, int], m2: Mapping[str, int]) -> bool:
    """m1 >= m2 componentwise over the union of supports."""
    return all(m1.get(p, 0) >= n for p, n in m2.items())


def merge_markings(
    m1: Mapping[str, int],
    places1: Iterable[str],
    m2: Mapping[str, int],
    places2: Iterable[str],
) -> Marking:
    """The unique marking over P1 u P2 restricting to m1 and m2."""
    p1 = list(places1)
    p2 = list(places2)
    shared = set(p1) & set(p2)
    for p in p1:
        if p in shared and m1.get(p, 0) != m2.get(p, 0):
            raise IncompatibleMarkingsError(p, m1.get(p, 0), m2.get(p, 0))
    tokens = {p: m1.get(p, 0) for p in p1}
    tokens.update({p: m2.get(p, 0) for p in p2})
    return Marking.of(tokens)

