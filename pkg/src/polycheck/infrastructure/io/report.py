"""Run reports: a human summary and a one-line-per-query machine record."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Tuple

from polycheck.domain.enums import Quantifier
from polycheck.domain.models import Verdict


@dataclass(frozen=True)
class QueryReport:
    name: str
    quantifier: Quantifier
    text: str
    verdict: Verdict
    elapsed_s: float
    # every procedure that ran, in completion order
    attempts: Tuple[Tuple[str, Verdict], ...] = ()
    oracle: Optional[Verdict] = None

    @property
    def answer(self) -> str:
        holds = self.verdict.holds
        if holds is None:
            return "UNKNOWN"
        return "TRUE" if holds else "FALSE"

    @property
    def agrees(self) -> Optional[bool]:
        """Oracle agreement; None when either side has no definitive answer."""
        if self.oracle is None or not self.oracle.definitive or not self.verdict.definitive:
            return None
        return self.oracle.holds == self.verdict.holds


@dataclass(frozen=True)
class ReductionSummary:
    places_before: int
    places_after: int
    transitions_before: int
    transitions_after: int
    steps: int
    ratio: Fraction
    system: str = ""


@dataclass(frozen=True)
class Report:
    net_name: str
    reduction: Optional[ReductionSummary]
    queries: List[QueryReport] = field(default_factory=list)

    @property
    def ratio(self) -> Fraction:
        return self.reduction.ratio if self.reduction is not None else Fraction(0)

    @property
    def exit_code(self) -> int:
        return 2 if any(q.verdict.holds is None for q in self.queries) else 0


def _fraction(r: Fraction) -> str:
    return f"{r.numerator}/{r.denominator}"


def machine_line(q: QueryReport, ratio: Fraction) -> str:
    depth = "-" if q.verdict.depth is None else str(q.verdict.depth)
    method = q.verdict.method or "none"
    ms = int(round(q.elapsed_s * 1000))
    return f"FORMULA {q.name} {q.answer} METHOD {method} DEPTH {depth} RATIO {_fraction(ratio)} TIME {ms}"


def render_machine(report: Report) -> str:
    return "".join(machine_line(q, report.ratio) + "\n" for q in report.queries)


def render_human(report: Report, *, show_system: bool = False) -> str:
    lines = [f"net {report.net_name}"]
    red = report.reduction
    if red is not None:
        lines.append(
            f"  reduced {red.places_before} -> {red.places_after} places, "
            f"{red.transitions_before} -> {red.transitions_after} transitions "
            f"in {red.steps} steps (ratio {_fraction(red.ratio)})"
        )
        if show_system and red.system:
            lines.extend("    " + eq for eq in red.system.splitlines())
    for q in report.queries:
        v = q.verdict
        detail = [v.method or "no method"]
        if v.depth is not None:
            detail.append(f"depth {v.depth}")
        detail.append(f"{q.elapsed_s * 1000:.0f} ms")
        lines.append(f"{q.name}: {q.text}")
        lines.append(f"  {q.answer} [{v.kind.value}] ({', '.join(detail)})")
        if v.witness is not None:
            lines.append(f"  witness: {v.witness}")
        if v.marking is not None:
            lines.append(f"  marking: {v.marking.render()}")
        if v.certificate is not None and hasattr(v.certificate, "render"):
            lines.append("  invariant:")
            lines.extend("    " + c for c in v.certificate.render().splitlines())
        for note in v.notes:
            lines.append(f"  note: {note}")
        if not v.definitive:
            reasons = "; ".join(f"{m}: {a.reason}" for m, a in q.attempts if not a.definitive) or (v.reason or "")
            lines.append(f"  reasons: {reasons}")
        if q.oracle is not None:
            agree = {True: "agrees", False: "DISAGREES", None: "inconclusive"}[q.agrees]
            lines.append(f"  oracle: {q.oracle.kind.value} ({agree})")
    return "\n".join(lines) + "\n"


__all__ = ["QueryReport", "ReductionSummary", "Report", "machine_line", "render_human", "render_machine"]
