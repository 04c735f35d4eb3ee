"""Domain exceptions."""
from __future__ import annotations

from typing import Optional, Sequence


class PolycheckError(Exception):
    """Base error for polycheck."""


# -----------------------------
# Net semantics
# -----------------------------

class NetError(PolycheckError):
    pass


class UnknownTransitionError(NetError):
    def __init__(self, transition: str):
        super().__init__(f"unknown transition {transition!r}")
        self.transition = transition


class TransitionNotEnabledError(NetError):
    def __init__(self, transition: str, place: str, needed: int, available: int):
        super().__init__(
            f"transition {transition!r} not enabled: place {place!r} holds {available}, needs {needed}"
        )
        self.transition = transition
        self.place = place
        self.needed = needed
        self.available = available


class SequenceNotFireableError(NetError):
    def __init__(self, index: int, transition: str, cause: Optional[TransitionNotEnabledError] = None):
        super().__init__(f"step {index} ({transition!r}) is not fireable")
        self.index = index
        self.transition = transition
        self.cause = cause


class IncompatibleMarkingsError(NetError):
    def __init__(self, place: str, left: int, right: int):
        super().__init__(f"markings disagree on shared place {place!r}: {left} != {right}")
        self.place = place


# -----------------------------
# Formulas and encodings
# -----------------------------

class FormulaError(PolycheckError):
    pass


class UnboundVariableError(FormulaError):
    def __init__(self, name: str):
        super().__init__(f"unbound variable {name!r}")
        self.name = name


class SolverRequiredError(FormulaError):
    """Existential block could not be decided by substitution or bounded search."""


class EncodingError(FormulaError):
    """Term cannot be emitted in the configured logic."""


# -----------------------------
# Linear systems
# -----------------------------

class LinearSystemError(PolycheckError):
    pass


class VectorLengthError(LinearSystemError):
    pass


class UnboundedPreimageError(LinearSystemError):
    def __init__(self, variables: Sequence[str]):
        super().__init__(f"unbounded variables: {', '.join(variables)}")
        self.variables = tuple(variables)


# -----------------------------
# Solver process
# -----------------------------

class SolverError(RuntimeError, PolycheckError):
    pass


class SessionDeadError(SolverError):
    def __init__(self, message: str, stderr_tail: str = ""):
        text = message if not stderr_tail else f"{message}\n--- solver stderr ---\n{stderr_tail}"
        super().__init__(text)
        self.stderr_tail = stderr_tail


class ProtocolError(SolverError):
    def __init__(self, message: str, line: str):
        super().__init__(f"{message}: {line!r}")
        self.line = line


class SolverStateError(SolverError):
    pass


class UndecidedError(SolverError):
    """The solver answered unknown where the caller needs sat or unsat."""

    def __init__(self, message: str, reason: str = "unknown"):
        super().__init__(f"{message} ({reason})")
        self.reason = reason


# -----------------------------
# Procedures
# -----------------------------

class WitnessLiftError(PolycheckError):
    """A reduced-net witness has no counterpart in the original net."""


class CertificationError(PolycheckError):
    """An invariant produced by PDR failed its post-hoc checks."""


class CounterexampleFound(PolycheckError):
    """Raised inside PDR when an obligation chain reaches the initial state."""

    def __init__(self, obligation):
        super().__init__("counterexample reached the initial marking")
        self.obligation = obligation


# -----------------------------
# Input
# -----------------------------

class ParseError(PolycheckError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        where = f"{line}:{column}: " if line else ""
        super().__init__(f"{where}{message}")
        self.message = message
        self.line = line
        self.column = column
