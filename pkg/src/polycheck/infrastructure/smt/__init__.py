from .manager import SolverContext, locate_solver
from .session import SatResult, SolverInfo, SolverSession

__all__ = ["SatResult", "SolverContext", "SolverInfo", "SolverSession", "locate_solver"]
