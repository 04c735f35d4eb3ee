from __future__ import annotations

from .settings import Budget, OracleCutoffs, ReductionPolicy, RunConfig, SolverConfig

__all__ = ["Budget", "OracleCutoffs", "ReductionPolicy", "RunConfig", "SolverConfig"]
