from __future__ import annotations

from .loader import load_net, load_queries
from .mcc import parse_mcc
from .pnml import parse_pnml
from .properties import NamedQuery, parse_properties, parse_property, quote_name
from .report import QueryReport, ReductionSummary, Report, machine_line, render_human, render_machine
from .tina import parse_net, print_net

__all__ = [
    "NamedQuery",
    "QueryReport",
    "ReductionSummary",
    "Report",
    "load_net",
    "load_queries",
    "machine_line",
    "parse_mcc",
    "parse_net",
    "parse_pnml",
    "parse_properties",
    "parse_property",
    "print_net",
    "quote_name",
    "render_human",
    "render_machine",
]
