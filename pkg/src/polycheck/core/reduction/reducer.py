from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Tuple

from polycheck.core.abstraction.system import Constraint, LinearSystem
from polycheck.core.config.settings import ReductionPolicy
from polycheck.core.reduction.rules import RULES, FreshNames, ReductionStep
from polycheck.domain.models import Marking, PetriNet

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ReductionTrace:
    """Every step taken from (initial_net, initial_marking) to the reduced pair."""
    initial_net: PetriNet
    initial_marking: Marking
    steps: Tuple[ReductionStep, ...]
    final_net: PetriNet
    final_marking: Marking
    truncated: bool = False

    @property
    def equations(self) -> Tuple[Constraint, ...]:
        return tuple(c for s in self.steps for c in s.equations)

    @property
    def system(self) -> LinearSystem:
        return LinearSystem.build(self.equations, self.initial_net.places, self.final_net.places)

    def replay(self, m: Optional[Marking] = None) -> Marking:
        """Push an initial-net marking through every step's marking map."""
        cur = self.initial_marking if m is None else m
        for s in self.steps:
            cur = s.apply_marking(cur)
        return cur


def reduce(net: PetriNet, m0: Marking, policy: Optional[ReductionPolicy] = None) -> ReductionTrace:
    """
    Apply the enabled rules, in priority order, until none matches or the
    step cap is hit (the trace is then flagged truncated).
    """
    policy = policy or ReductionPolicy()
    names = FreshNames(net.places + net.transitions)
    cur_net, cur_m = net, m0.restrict(net.places)
    steps = []
    truncated = False

    while True:
        if len(steps) >= policy.max_steps:
            truncated = True
            log.warning("reduction stopped after %d steps", len(steps))
            break
        step = None
        for rule in policy.enabled_rules:
            step = RULES[rule](cur_net, cur_m, names)
            if step is not None:
                break
        if step is None:
            break
        log.debug("reduce %s", step.describe())
        steps.append(step)
        cur_net, cur_m = step.net_after, step.marking_after

    log.info(
        "reduced %s: %d -> %d places, %d -> %d transitions in %d steps",
        net.name, len(net.places), len(cur_net.places),
        len(net.transitions), len(cur_net.transitions), len(steps),
    )
    return ReductionTrace(net, m0.restrict(net.places), tuple(steps), cur_net, cur_m, truncated)


def render_system(trace: ReductionTrace) -> str:
    return trace.system.render()


def reduction_ratio(trace: ReductionTrace) -> Fraction:
    """Share of initial places removed; 0 for a net without places."""
    p_init = len(trace.initial_net.places)
    if p_init == 0:
        return Fraction(0)
    return Fraction(p_init - len(trace.final_net.places), p_init)


__all__ = ["ReductionTrace", "reduce", "reduction_ratio", "render_system"]
