from __future__ import annotations

import os
import time
from pathlib import Path
from typing import List, Optional, Tuple

from pydantic import BaseModel, Field, model_validator

from polycheck.domain.enums import DEFAULT_RULE_PRIORITY, Method, NetFormat, OutputFormat, RuleId

SOLVER_ENV_VAR = "POLYCHECK_SOLVER"


class SolverConfig(BaseModel):
    path: str = "z3"
    args: List[str] = Field(default_factory=lambda: ["-in", "-smt2"])
    timeout_ms: int = Field(default=0, ge=0)  # per query; 0 = none
    produce_cores: bool = True
    logic: str = "QF_LIA"
    watchdog_grace_ms: int = Field(default=2000, ge=0)
    trace: bool = False  # log solver traffic at DEBUG

    def resolved_path(self) -> str:
        return os.environ.get(SOLVER_ENV_VAR) or self.path

    def signature(self) -> Tuple:
        return (
            self.resolved_path(),
            tuple(self.args),
            int(self.timeout_ms),
            bool(self.produce_cores),
            self.logic,
            int(self.watchdog_grace_ms),
        )


class Budget(BaseModel):
    max_depth: int = Field(default=1000, ge=0)
    wall_clock_s: Optional[float] = Field(default=None, gt=0)
    max_frames: int = Field(default=10_000, ge=1)

    def deadline(self, start: Optional[float] = None) -> Optional[float]:
        if self.wall_clock_s is None:
            return None
        return (time.monotonic() if start is None else start) + float(self.wall_clock_s)


class OracleCutoffs(BaseModel):
    max_states: int = Field(default=100_000, ge=1)
    max_tokens: int = Field(default=64, ge=0)
    obs_depth: int = Field(default=12, ge=0)


class ReductionPolicy(BaseModel):
    enabled_rules: Tuple[RuleId, ...] = DEFAULT_RULE_PRIORITY
    max_steps: int = Field(default=10_000, ge=0)

    def signature(self) -> Tuple:
        return (tuple(r.value for r in self.enabled_rules), int(self.max_steps))


class RunConfig(BaseModel):
    """
    One model-checking run.
    Exactly one property source is used: inline text, a property file, or an
    MCC XML file (all queries of which are checked).
    """

    net_path: Path
    net_format: Optional[NetFormat] = None  # None -> from the file suffix
    property_text: Optional[str] = None
    property_path: Optional[Path] = None
    mcc_path: Optional[Path] = None

    methods: Tuple[Method, ...] = (Method.AUTO,)
    reductions: bool = True
    timeout_s: float = 60.0

    solver: SolverConfig = Field(default_factory=SolverConfig)
    budget: Budget = Field(default_factory=Budget)
    cutoffs: OracleCutoffs = Field(default_factory=OracleCutoffs)
    policy: ReductionPolicy = Field(default_factory=ReductionPolicy)

    oracle_check: bool = False
    fixpoint_check: bool = False
    check_oars: bool = False
    output: OutputFormat = OutputFormat.HUMAN

    @model_validator(mode="after")
    def _check(self) -> "RunConfig":
        if self.timeout_s <= 0:
            raise ValueError("timeout must be > 0")
        if not self.methods:
            raise ValueError("at least one method is required")
        sources = [s for s in (self.property_text, self.property_path, self.mcc_path) if s is not None]
        if len(sources) != 1:
            raise ValueError("give exactly one of property text, property file or MCC file")
        return self

    def resolved_format(self) -> NetFormat:
        if self.net_format is not None:
            return self.net_format
        return NetFormat.PNML if self.net_path.suffix.lower() in (".pnml", ".xml") else NetFormat.NET

    def signature(self) -> Tuple:
        return (
            str(self.net_path),
            self.resolved_format().value,
            tuple(m.value for m in self.methods),
            bool(self.reductions),
            float(self.timeout_s),
            self.solver.signature(),
            self.policy.signature(),
            bool(self.oracle_check),
            bool(self.fixpoint_check),
            self.output.value,
        )
