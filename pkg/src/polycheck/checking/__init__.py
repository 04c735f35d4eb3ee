from __future__ import annotations

from .bmc import BmcOutcome, bmc_check, bmc_with_reduction, lift_witness
from .oracle import (
    AbstractionCheck,
    StateGraph,
    check_e_abstraction_bounded,
    check_trace,
    enumerate_states,
    explicit_check,
    shortest_path,
)
from .pdr import Certificate, Pdr, ProofObligation, certify, generalize_witness, pdr_with_reduction, prove

__all__ = [
    "AbstractionCheck",
    "BmcOutcome",
    "Certificate",
    "Pdr",
    "ProofObligation",
    "StateGraph",
    "bmc_check",
    "bmc_with_reduction",
    "certify",
    "check_e_abstraction_bounded",
    "check_trace",
    "enumerate_states",
    "explicit_check",
    "generalize_witness",
    "lift_witness",
    "pdr_with_reduction",
    "prove",
    "shortest_path",
]
