from __future__ import annotations

from enum import Enum


# -----------------------------
# Formulas
# -----------------------------

class Comparator(str, Enum):
    """Canonical atom comparators; strict ones are normalized away at construction."""
    EQ = "="
    LE = "<="
    GE = ">="


class Quantifier(str, Enum):
    EF = "EF"
    AG = "AG"


class VerdictKind(str, Enum):
    REACHABLE = "Reachable"
    UNREACHABLE = "Unreachable"
    INVARIANT = "Invariant"
    NOT_INVARIANT = "NotInvariant"
    UNKNOWN = "Unknown"


# -----------------------------
# Reductions
# -----------------------------

class RuleId(str, Enum):
    CONCAT = "CONCAT"
    AGG = "AGG"
    RED = "RED"
    SHORTCUT = "SHORTCUT"
    REDT = "REDT"
    DEADT = "DEADT"
    CONSTANT = "CONSTANT"
    SOURCE = "SOURCE"


DEFAULT_RULE_PRIORITY = (
    RuleId.DEADT,
    RuleId.REDT,
    RuleId.CONSTANT,
    RuleId.RED,
    RuleId.SHORTCUT,
    RuleId.CONCAT,
    RuleId.AGG,
    RuleId.SOURCE,
)


# -----------------------------
# Solver / procedures
# -----------------------------

class SatStatus(str, Enum):
    SAT = "sat"
    UNSAT = "unsat"
    UNKNOWN = "unknown"


class BmcStatus(str, Enum):
    REACHABLE = "Reachable"
    EXHAUSTED = "Exhausted"
    UNKNOWN = "Unknown"


class AbstractionStatus(str, Enum):
    CERTIFIED = "Certified"
    REFUTED = "Refuted"
    INCONCLUSIVE = "Inconclusive"


# -----------------------------
# Frontend
# -----------------------------

class Method(str, Enum):
    BMC = "bmc"
    PDR = "pdr"
    AUTO = "auto"


class NetFormat(str, Enum):
    """
    Input net syntax:
      - NET  -> TINA textual format
      - PNML -> PNML P/T subset
    """
    NET = "net"
    PNML = "pnml"


class OutputFormat(str, Enum):
    HUMAN = "human"
    MACHINE = "machine"
