from __future__ import annotations

from pathlib import Path

import pytest

from polycheck.application.cli import main
from polycheck.application.runner import Portfolio, run
from polycheck.core.config.settings import Budget, RunConfig, SolverConfig
from polycheck.domain.enums import Method, VerdictKind
from polycheck.domain.models import Verdict
from polycheck.infrastructure.smt.manager import locate_solver

QUERIES = "reach: EF p2 >= 1\nsafe: AG p6 <= 4\nbad: AG p0 >= 1\n"


@pytest.fixture(autouse=True)
def _needs_solver():
    if locate_solver() is None:
        pytest.skip("no SMT solver executable available")


@pytest.fixture
def model(tmp_path: Path, pipeline_text: str) -> Path:
    path = tmp_path / "m1.net"
    path.write_text(pipeline_text, encoding="utf-8")
    return path


def _config(net: Path, **kw) -> RunConfig:
    kw.setdefault("budget", Budget(max_depth=20))
    return RunConfig(net_path=net, timeout_s=60, **kw)


@pytest.mark.parametrize("reductions", [True, False])
def test_run_answers_every_query(model, tmp_path, reductions):
    props = tmp_path / "m1.props"
    props.write_text(QUERIES, encoding="utf-8")

    report = run(_config(model, property_path=props, reductions=reductions, oracle_check=True))

    assert [q.name for q in report.queries] == ["reach", "safe", "bad"]
    assert [q.answer for q in report.queries] == ["TRUE", "TRUE", "FALSE"]
    assert all(q.agrees for q in report.queries), [q.oracle for q in report.queries]
    assert report.exit_code == 0
    assert (report.reduction is not None) == reductions


def test_fully_reducible_net(tmp_path):
    path = tmp_path / "r.net"
    path.write_text("pl c (2)\npl s (3)\ntr t c -> c\ntr d : tau s ->\n", encoding="utf-8")

    report = run(_config(path, property_text="EF c >= 3", methods=(Method.BMC,)))

    (q,) = report.queries
    assert q.verdict.kind == VerdictKind.UNREACHABLE
    assert q.verdict.depth == 0
    assert report.ratio == 1


def test_pdr_alone_cannot_answer_non_monotone_goals(model):
    report = run(_config(model, property_text="EF p0 <= 0", methods=(Method.PDR,)))

    (q,) = report.queries
    assert q.answer == "UNKNOWN"
    assert "monotone" in q.verdict.reason
    assert report.exit_code == 2


def test_portfolio_interrupts_the_loser():
    portfolio = Portfolio(SolverConfig())

    def slow(session):
        portfolio.cancel.wait(30)
        return Verdict.unknown("cancelled", method="slow")

    def fast(session):
        return Verdict(VerdictKind.REACHABLE, method="fast")

    winner, attempts = portfolio.run([("slow", slow), ("fast", fast)])

    assert winner is not None and winner[0] == "fast"
    assert sorted(name for name, _ in attempts) == ["fast", "slow"]
    assert portfolio.cancel.is_set()


def test_cli_machine_output(model, capsys):
    code = main([str(model), "-p", "EF p2 >= 1", "--machine", "--max-depth", "10"])

    out = capsys.readouterr().out.strip()
    assert code == 0
    assert out.startswith("FORMULA q1 TRUE METHOD ")
    assert " RATIO 4/7 " in out


def test_cli_human_output(model, capsys):
    code = main([str(model), "-p", "AG p0 >= 1", "-m", "bmc", "--no-reductions", "--show-system"])

    out = capsys.readouterr().out
    assert code == 0
    assert "FALSE [NotInvariant] (bmc, depth 5" in out
    assert "witness: t0 t0 t0 t0 t0" in out
