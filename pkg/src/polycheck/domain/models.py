"""Domain models: nets, markings, sequences and verdicts."""
from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Any, Dict, Iterable, Iterator, Mapping, Optional, Tuple

from polycheck.domain.enums import VerdictKind
from polycheck.domain.exceptions import NetError, UnknownTransitionError

TAU = "tau"

Row = Mapping[str, int]


def _freeze_row(row: Optional[Mapping[str, int]]) -> Row:
    clean = {p: int(w) for p, w in (row or {}).items() if int(w) != 0}
    return MappingProxyType(clean)


# -----------------------------
# Marking
# -----------------------------

@dataclass(frozen=True)
class Marking(Mapping[str, int]):
    """
    Total map place -> token count, stored sparsely.
    Absent places read as 0; iteration and len() cover the support only.
    """
    items_: Tuple[Tuple[str, int], ...] = ()

    def __post_init__(self) -> None:
        seen: Dict[str, int] = {}
        for p, n in self.items_:
            n = int(n)
            if n < 0:
                raise NetError(f"negative token count on {p!r}: {n}")
            if n:
                seen[p] = n
        object.__setattr__(self, "items_", tuple(sorted(seen.items())))

    @classmethod
    def of(cls, tokens: Optional[Mapping[str, int]] = None, **kw: int) -> "Marking":
        merged = dict(tokens or {})
        merged.update(kw)
        return cls(tuple(merged.items()))

    # Mapping protocol
    def __getitem__(self, place: str) -> int:
        return self._as_dict().get(place, 0)

    def __iter__(self) -> Iterator[str]:
        return (p for p, _ in self.items_)

    def __len__(self) -> int:
        return len(self.items_)

    def __contains__(self, place: object) -> bool:
        return place in self._as_dict()

    def __hash__(self) -> int:
        return hash(self.items_)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Marking):
            return self.items_ == other.items_
        if isinstance(other, Mapping):
            return self.items_ == Marking.of(other).items_
        return NotImplemented

    def _as_dict(self) -> Dict[str, int]:
        cached = self.__dict__.get("_dict")
        if cached is None:
            cached = dict(self.items_)
            object.__setattr__(self, "_dict", cached)
        return cached

    def get(self, place: str, default: Any = 0) -> int:  # type: ignore[override]
        return self._as_dict().get(place, default)

    @property
    def support(self) -> Tuple[str, ...]:
        return tuple(p for p, _ in self.items_)

    def total(self) -> int:
        return sum(n for _, n in self.items_)

    def restrict(self, places: Iterable[str]) -> "Marking":
        keep = set(places)
        return Marking(tuple((p, n) for p, n in self.items_ if p in keep))

    def covers(self, other: Mapping[str, int]) -> bool:
        return all(self[p] >= n for p, n in other.items())

    def updated(self, changes: Mapping[str, int]) -> "Marking":
        d = dict(self.items_)
        d.update(changes)
        return Marking(tuple(d.items()))

    def render(self, places: Optional[Iterable[str]] = None) -> str:
        order = list(places) if places is not None else list(self.support)
        parts = [f"{p}:{self[p]}" for p in order if self[p]]
        return "<" + ", ".join(parts) + ">"

    def __repr__(self) -> str:
        return f"Marking({self.render()})"


# -----------------------------
# Sequences
# -----------------------------

@dataclass(frozen=True)
class FiringSequence:
    steps: Tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "steps", tuple(self.steps))

    def __iter__(self) -> Iterator[str]:
        return iter(self.steps)

    def __len__(self) -> int:
        return len(self.steps)

    def __add__(self, other: "FiringSequence") -> "FiringSequence":
        return FiringSequence(self.steps + tuple(other))

    def __str__(self) -> str:
        return " ".join(self.steps) if self.steps else "ε"


@dataclass(frozen=True)
class ObservationSequence:
    labels: Tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "labels", tuple(self.labels))
        if TAU in self.labels:
            raise NetError("observation sequences cannot contain the silent label")

    def __iter__(self) -> Iterator[str]:
        return iter(self.labels)

    def __len__(self) -> int:
        return len(self.labels)

    def __add__(self, other: "ObservationSequence") -> "ObservationSequence":
        return ObservationSequence(self.labels + tuple(other))


# -----------------------------
# Petri net
# -----------------------------

@dataclass(frozen=True)
class PetriNet:
    """
    Generalized Petri net with labeled transitions.
    Declaration order of places and transitions is the canonical variable order.
    Unlabeled transitions are labeled with their own name; TAU marks silent ones.
    """
    places: Tuple[str, ...]
    transitions: Tuple[str, ...]
    pre: Mapping[str, Row] = field(default_factory=dict)
    post: Mapping[str, Row] = field(default_factory=dict)
    labels: Mapping[str, str] = field(default_factory=dict)
    name: str = "net"

    def __post_init__(self) -> None:
        places = tuple(self.places)
        transitions = tuple(self.transitions)
        if len(set(places)) != len(places):
            raise NetError("duplicate place identifiers")
        if len(set(transitions)) != len(transitions):
            raise NetError("duplicate transition identifiers")
        clash = set(places) & set(transitions)
        if clash:
            raise NetError(f"identifiers used as both place and transition: {sorted(clash)}")

        known = set(places)
        pre: Dict[str, Row] = {}
        post: Dict[str, Row] = {}
        for t in transitions:
            for src, dst in ((self.pre, pre), (self.post, post)):
                row = _freeze_row(src.get(t))
                for p, w in row.items():
                    if p not in known:
                        raise NetError(f"transition {t!r} refers to undeclared place {p!r}")
                    if w < 0:
                        raise NetError(f"negative arc weight {w} between {t!r} and {p!r}")
                dst[t] = row
        stray = (set(self.pre) | set(self.post) | set(self.labels)) - set(transitions)
        if stray:
            raise UnknownTransitionError(sorted(stray)[0])

        labels = {t: str(self.labels.get(t, t)) for t in transitions}

        object.__setattr__(self, "places", places)
        object.__setattr__(self, "transitions", transitions)
        object.__setattr__(self, "pre", MappingProxyType(pre))
        object.__setattr__(self, "post", MappingProxyType(post))
        object.__setattr__(self, "labels", MappingProxyType(labels))

    # -----------------------
    # Lookups
    # -----------------------
    def check_transition(self, t: str) -> None:
        if t not in self.pre:
            raise UnknownTransitionError(t)

    def pre_of(self, t: str) -> Row:
        self.check_transition(t)
        return self.pre[t]

    def post_of(self, t: str) -> Row:
        self.check_transition(t)
        return self.post[t]

    def label_of(self, t: str) -> str:
        self.check_transition(t)
        return self.labels[t]

    def is_silent(self, t: str) -> bool:
        return self.label_of(t) == TAU

    def producers(self, p: str) -> Tuple[str, ...]:
        """Transitions with an arc into p."""
        return tuple(t for t in self.transitions if self.post[t].get(p, 0))

    def consumers(self, p: str) -> Tuple[str, ...]:
        """Transitions with an arc out of p."""
        return tuple(t for t in self.transitions if self.pre[t].get(p, 0))

    def place_row(self, p: str) -> Tuple[Tuple[int, int], ...]:
        """(Pre, Post) weights of p for every transition, in declaration order."""
        return tuple((self.pre[t].get(p, 0), self.post[t].get(p, 0)) for t in self.transitions)

    # -----------------------
    # Editing (new nets)
    # -----------------------
    def edited(
        self,
        *,
        places: Optional[Iterable[str]] = None,
        transitions: Optional[Iterable[str]] = None,
        pre: Optional[Mapping[str, Mapping[str, int]]] = None,
        post: Optional[Mapping[str, Mapping[str, int]]] = None,
        labels: Optional[Mapping[str, str]] = None,
    ) -> "PetriNet":
        ts = tuple(transitions) if transitions is not None else self.transitions
        src_pre = pre if pre is not None else self.pre
        src_post = post if post is not None else self.post
        src_labels = labels if labels is not None else self.labels
        return PetriNet(
            places=tuple(places) if places is not None else self.places,
            transitions=ts,
            pre={t: dict(src_pre.get(t, {})) for t in ts},
            post={t: dict(src_post.get(t, {})) for t in ts},
            labels={t: src_labels.get(t, t) for t in ts},
            name=self.name,
        )

    def without_transition(self, t: str) -> "PetriNet":
        self.check_transition(t)
        return self.edited(transitions=[u for u in self.transitions if u != t])

    def without_place(self, p: str) -> "PetriNet":
        if p not in self.places:
            raise NetError(f"unknown place {p!r}")
        strip = lambda row: {q: w for q, w in row.items() if q != p}  # noqa: E731
        return self.edited(
            places=[q for q in self.places if q != p],
            pre={t: strip(self.pre[t]) for t in self.transitions},
            post={t: strip(self.post[t]) for t in self.transitions},
        )


# -----------------------------
# Verdict
# -----------------------------

@dataclass(frozen=True)
class Verdict:
    kind: VerdictKind
    witness: Optional[FiringSequence] = None
    marking: Optional[Marking] = None
    reason: Optional[str] = None
    method: str = ""
    depth: Optional[int] = None
    certificate: Any = None
    notes: Tuple[str, ...] = ()

    @property
    def holds(self) -> Optional[bool]:
        """Truth value of the query this verdict answers (None when unknown)."""
        if self.kind in (VerdictKind.REACHABLE, VerdictKind.INVARIANT):
            return True
        if self.kind in (VerdictKind.UNREACHABLE, VerdictKind.NOT_INVARIANT):
            return False
        return None

    @property
    def definitive(self) -> bool:
        return self.kind != VerdictKind.UNKNOWN

    @classmethod
    def unknown(cls, reason: str, *, method: str = "", notes: Tuple[str, ...] = ()) -> "Verdict":
        return cls(VerdictKind.UNKNOWN, reason=reason, method=method, notes=notes)


__all__ = [
    "TAU",
    "Marking",
    "FiringSequence",
    "ObservationSequence",
    "PetriNet",
    "Verdict",
]
