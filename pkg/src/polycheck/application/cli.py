from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError

from polycheck.core.config.settings import Budget, OracleCutoffs, RunConfig, SolverConfig
from polycheck.domain.enums import Method, NetFormat, OutputFormat
from polycheck.domain.exceptions import PolycheckError
from polycheck.infrastructure.io.report import render_human, render_machine

from .runner import run

log = logging.getLogger("polycheck")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polycheck",
        description="Reachability and invariant checking of Petri nets with polyhedral reductions.",
    )
    parser.add_argument("net", type=Path, help="net file (.net or .pnml)")
    parser.add_argument("-f", "--format", choices=[f.value for f in NetFormat], help="net format (default: from suffix)")

    props = parser.add_mutually_exclusive_group(required=True)
    props.add_argument("-p", "--property", metavar="TEXT", help="inline property, e.g. 'EF p1 >= 2'")
    props.add_argument("--property-file", type=Path, metavar="PATH", help="one property per line")
    props.add_argument("--mcc", type=Path, metavar="PATH", help="MCC reachability XML file")

    parser.add_argument("-m", "--method", action="append", choices=[m.value for m in Method],
                        help="procedure to run (repeatable, default: auto)")
    parser.add_argument("--no-reductions", action="store_true", help="check the net as given")
    parser.add_argument("-t", "--timeout", type=float, default=60.0, help="seconds per query (default: 60)")
    parser.add_argument("--max-depth", type=int, default=Budget().max_depth, help="BMC depth bound")
    parser.add_argument("--solver", metavar="PATH", help="SMT solver executable (default: z3)")
    parser.add_argument("--solver-timeout-ms", type=int, default=0, help="per-query solver timeout")
    parser.add_argument("--oracle-check", action="store_true", help="cross-check verdicts by state enumeration")
    parser.add_argument("--max-states", type=int, default=OracleCutoffs().max_states, help="oracle state cap")
    parser.add_argument("--fixpoint-check", action="store_true", help="let BMC detect an exhausted state space")
    parser.add_argument("--check-oars", action="store_true", help="re-check PDR frame invariants every level")
    parser.add_argument("--machine", action="store_true", help="one FORMULA line per query")
    parser.add_argument("--show-system", action="store_true", help="print the reduction equations")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    parser.add_argument("--debug-solver", action="store_true", help="log SMT-LIB traffic (with -v)")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    solver = SolverConfig(timeout_ms=args.solver_timeout_ms, trace=args.debug_solver)
    if args.solver:
        solver = solver.model_copy(update={"path": args.solver})
    return RunConfig(
        net_path=args.net,
        net_format=NetFormat(args.format) if args.format else None,
        property_text=args.property,
        property_path=args.property_file,
        mcc_path=args.mcc,
        methods=tuple(Method(m) for m in (args.method or [Method.AUTO.value])),
        reductions=not args.no_reductions,
        timeout_s=args.timeout,
        solver=solver,
        budget=Budget(max_depth=args.max_depth),
        cutoffs=OracleCutoffs(max_states=args.max_states),
        oracle_check=args.oracle_check,
        fixpoint_check=args.fixpoint_check,
        check_oars=args.check_oars,
        output=OutputFormat.MACHINE if args.machine else OutputFormat.HUMAN,
    )


def main(argv: Optional[List[str]] = None) -> int:
    """Exit status: 0 every query answered, 2 some query unknown, 1 error."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(format="%(message)s", level=logging.DEBUG if args.verbose else logging.WARNING)

    try:
        config = config_from_args(args)
        report = run(config)
    except ValidationError as exc:
        log.error("invalid options: %s", exc)
        return 1
    except (PolycheckError, OSError) as exc:
        log.error("polycheck: %s", exc)
        return 1

    if config.output == OutputFormat.MACHINE:
        sys.stdout.write(render_machine(report))
    else:
        sys.stdout.write(render_human(report, show_system=args.show_system))
    return report.exit_code


if __name__ == "__main__":
    raise SystemExit(main())
