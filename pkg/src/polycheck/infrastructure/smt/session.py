"""
Incremental solver sessions over the SMT-LIB text protocol.

A session owns one child process. Every command runs with
`:print-success true`, so each one is answered and errors surface at the
command that caused them. The commands issued since start-up are journaled
per scope; when the host-side watchdog has to kill a runaway query, the
process is restarted and the journal replayed so the caller keeps its
context.
"""
from __future__ import annotations

import logging
import threading
import warnings
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Optional, Set, Union

from polycheck.core.config.settings import SolverConfig
from polycheck.core.logic.formula import Formula, atom, free_vars
from polycheck.core.math.linear import LinExpr
from polycheck.domain.enums import SatStatus
from polycheck.domain.exceptions import ProtocolError, SessionDeadError, SolverStateError
from polycheck.infrastructure.smt.encoding import (
    Assert,
    CheckSat,
    DeclareConst,
    Echo,
    GetInfo,
    GetUnsatCore,
    GetValue,
    Pop,
    Push,
    SetLogic,
    SetOption,
    skolemize,
)
from polycheck.infrastructure.smt.engine import ProcessSpec, ResponseTimeout, SolverProcess

log = logging.getLogger(__name__)

SExpr = Union[str, List["SExpr"]]

_READY = "polycheck-ready"


@dataclass(frozen=True)
class SatResult:
    status: SatStatus
    reason: Optional[str] = None  # timeout | interrupted | solver, for UNKNOWN

    @property
    def is_sat(self) -> bool:
        return self.status == SatStatus.SAT

    @property
    def is_unsat(self) -> bool:
        return self.status == SatStatus.UNSAT

    @property
    def is_unknown(self) -> bool:
        return self.status == SatStatus.UNKNOWN


@dataclass(frozen=True)
class SolverInfo:
    name: str
    version: str
    unsat_cores: bool


# -----------------------------
# S-expressions
# -----------------------------

def _tokens(text: str) -> List[str]:
    out: List[str] = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch in "()":
            out.append(ch)
            i += 1
        elif ch == "|":
            j = text.index("|", i + 1)
            out.append(text[i:j + 1])
            i = j + 1
        elif ch == '"':
            j = i + 1
            while j < n:
                if text[j] == '"':
                    if j + 1 < n and text[j + 1] == '"':
                        j += 2
                        continue
                    break
                j += 1
            if j >= n:
                raise ValueError("unterminated string")
            out.append(text[i:j + 1])
            i = j + 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in '()|"':
                j += 1
            out.append(text[i:j])
            i = j
    return out


def parse_sexpr(text: str) -> SExpr:
    try:
        toks = _tokens(text)
    except ValueError:
        raise ProtocolError("unterminated token", text) from None
    stack: List[List[SExpr]] = [[]]
    for tok in toks:
        if tok == "(":
            stack.append([])
        elif tok == ")":
            if len(stack) == 1:
                raise ProtocolError("unbalanced response", text)
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(tok)
    if len(stack) != 1 or len(stack[0]) != 1:
        raise ProtocolError("expected exactly one s-expression", text)
    return stack[0][0]


def _unquote(sym: str) -> str:
    if len(sym) >= 2 and sym[0] == sym[-1] and sym[0] in "|\"":
        return sym[1:-1]
    return sym


def _integer(value: SExpr, line: str) -> int:
    if isinstance(value, str):
        try:
            return int(value)
        except ValueError:
            raise ProtocolError("non-integer model value", line) from None
    if len(value) == 2 and value[0] == "-":
        return -_integer(value[1], line)
    raise ProtocolError("non-integer model value", line)


# -----------------------------
# Session
# -----------------------------

class SolverSession:
    """
    One solver process confined to one owner at a time.
    Only interrupt() may be called from another thread.
    """

    def __init__(self, config: Optional[SolverConfig] = None, *, path: Optional[str] = None):
        self.config = config or SolverConfig()
        self.path = path or self.config.resolved_path()
        self._proc = SolverProcess(ProcessSpec(self.path, tuple(self.config.args)), trace=self.config.trace)
        self._scopes: List[Set[str]] = [set()]
        self._journal: List[str] = []
        self._marks: List[int] = []
        self._last: Optional[SatStatus] = None
        self._labels = 0
        self._skolems = 0
        self._busy = False
        self._interrupted = threading.Event()
        self.cores_supported = bool(self.config.produce_cores)
        self.queries = 0

    # -----------------------
    # Lifecycle
    # -----------------------
    def start(self) -> "SolverSession":
        self._proc.start()
        self._handshake()
        return self

    def stop(self) -> None:
        self._proc.stop()

    @property
    def alive(self) -> bool:
        return self._proc.alive

    @property
    def depth(self) -> int:
        return len(self._scopes) - 1

    def __enter__(self) -> "SolverSession":
        return self.start()

    def __exit__(self, exc_type, exc, tb) -> None:
        self.stop()

    # -----------------------
    # Declarations and assertions
    # -----------------------
    def is_declared(self, name: str) -> bool:
        return any(name in s for s in self._scopes)

    def declare(self, name: str) -> None:
        """Declare an integer constant (once per visible scope) and assert it nonnegative."""
        if self.is_declared(name):
            return
        self._journaled(DeclareConst(name).render())
        self._journaled(Assert(atom(LinExpr.var(name), ">=", 0)).render())
        self._scopes[-1].add(name)

    def assert_term(self, f: Formula, label: Optional[str] = None) -> Optional[str]:
        """
        Assert f in the current scope. Positive existential blocks become
        fresh constants; free variables are declared on first use. With a
        label, the assertion is named for unsat-core extraction and the
        session-unique name is returned.
        """
        body, _ = skolemize(f, self._skolem_name)
        for v in sorted(free_vars(body)):
            self.declare(v)
        name = None
        if label is not None and self.cores_supported:
            self._labels += 1
            name = f"{label}!{self._labels}"
        self._journaled(Assert(body, name).render())
        self._last = None
        return name

    def push(self) -> None:
        self._marks.append(len(self._journal))
        self._journaled(Push().render())
        self._scopes.append(set())
        self._last = None

    def pop(self) -> None:
        if self.depth == 0:
            raise SolverStateError("pop without a matching push")
        self._command(Pop().render())
        self._scopes.pop()
        del self._journal[self._marks.pop():]
        self._last = None

    # -----------------------
    # Queries
    # -----------------------
    def check_sat(self) -> SatResult:
        if self._busy:
            raise SolverStateError("a query is already running on this session")
        self._busy = True
        self.queries += 1
        try:
            self._proc.send(CheckSat().render())
            resp = self._proc.read_response(self._query_timeout())
        except ResponseTimeout:
            log.warning("solver query exceeded %d ms, restarting the solver", self.config.timeout_ms)
            self._restart()
            self._last = SatStatus.UNKNOWN
            return SatResult(SatStatus.UNKNOWN, "timeout")
        except SessionDeadError:
            if self._interrupted.is_set():
                self._last = SatStatus.UNKNOWN
                return SatResult(SatStatus.UNKNOWN, "interrupted")
            raise
        finally:
            self._busy = False

        if resp in ("sat", "unsat"):
            self._last = SatStatus(resp)
            return SatResult(self._last)
        if resp == "unknown":
            self._last = SatStatus.UNKNOWN
            return SatResult(SatStatus.UNKNOWN, self._reason_unknown())
        raise ProtocolError("unexpected check-sat answer", resp)

    def get_model(self, names: Iterable[str]) -> Dict[str, int]:
        """Values of the given constants; undeclared ones are unconstrained and read 0."""
        if self._last != SatStatus.SAT:
            raise SolverStateError("get_model requires a preceding sat answer")
        wanted = list(dict.fromkeys(names))
        declared = [n for n in wanted if self.is_declared(n)]
        out = {n: 0 for n in wanted}
        if not declared:
            return out
        self._proc.send(GetValue(tuple(declared)).render())
        resp = self._proc.read_response(self._io_timeout())
        tree = self._checked(resp)
        if not isinstance(tree, list):
            raise ProtocolError("malformed get-value answer", resp)
        for pair in tree:
            if not isinstance(pair, list) or len(pair) != 2 or not isinstance(pair[0], str):
                raise ProtocolError("malformed get-value answer", resp)
            out[_unquote(pair[0])] = _integer(pair[1], resp)
        return out

    def get_unsat_core(self) -> FrozenSet[str]:
        if self._last != SatStatus.UNSAT:
            raise SolverStateError("get_unsat_core requires a preceding unsat answer")
        if not self.cores_supported:
            raise SolverStateError("unsat cores are disabled for this session")
        self._proc.send(GetUnsatCore().render())
        resp = self._proc.read_response(self._io_timeout())
        tree = self._checked(resp)
        if not isinstance(tree, list) or not all(isinstance(x, str) for x in tree):
            raise ProtocolError("malformed unsat core", resp)
        return frozenset(_unquote(x) for x in tree)  # type: ignore[arg-type]

    def is_satisfiable(self, *formulas: Formula) -> Optional[bool]:
        """Scoped one-shot query; None when the solver answers unknown."""
        self.push()
        try:
            for f in formulas:
                self.assert_term(f)
            r = self.check_sat()
        finally:
            if self.alive:
                self.pop()
        if r.is_unknown:
            return None
        return r.is_sat

    def identify(self) -> SolverInfo:
        name = self._info("name")
        version = self._info("version")
        return SolverInfo(name=name, version=version, unsat_cores=self.cores_supported)

    # -----------------------
    # Cancellation
    # -----------------------
    def interrupt(self) -> None:
        """Ask the running query to stop; kill the process if it does not within the grace period."""
        self._interrupted.set()
        self._proc.send_interrupt()
        grace = self.config.watchdog_grace_ms / 1000.0
        timer = threading.Timer(grace, self._kill_if_busy)
        timer.daemon = True
        timer.start()

    @property
    def interrupted(self) -> bool:
        return self._interrupted.is_set()

    def _kill_if_busy(self) -> None:
        if self._busy:
            log.debug("solver ignored the interrupt, killing pid %s", self._proc.pid)
            self._proc.kill()

    # -----------------------
    # Internal helpers
    # -----------------------
    def _setup(self) -> List[str]:
        cmds = [
            SetOption("produce-models", True).render(),
            SetOption("produce-unsat-cores", bool(self.config.produce_cores)).render(),
            SetLogic(self.config.logic).render(),
        ]
        if self.config.timeout_ms:
            cmds.append(SetOption("timeout", int(self.config.timeout_ms)).render())
        return cmds

    def _handshake(self) -> None:
        self._proc.send(SetOption("print-success", True).render())
        self._proc.send(Echo(_READY).render())
        for _ in range(4):
            resp = self._proc.read_response(self._io_timeout())
            if _unquote(resp) == _READY:
                break
            self._checked(resp)
        else:
            raise ProtocolError("solver did not acknowledge start-up", resp)
        for cmd in self._setup():
            resp = self._command(cmd, allow_unsupported=True)
            if resp == "unsupported" and "produce-unsat-cores" in cmd:
                self.cores_supported = False
                warnings.warn(
                    f"solver {self.path!r} does not produce unsat cores; MIC falls back to literal dropping.",
                    RuntimeWarning,
                )

    def _restart(self) -> None:
        self._proc.kill()
        self._proc.start()
        self._handshake()
        for cmd in self._journal:
            self._command(cmd)

    def _journaled(self, cmd: str) -> None:
        self._command(cmd)
        self._journal.append(cmd)

    def _command(self, cmd: str, *, allow_unsupported: bool = False) -> str:
        self._proc.send(cmd)
        resp = self._proc.read_response(self._io_timeout())
        if resp == "success" or (allow_unsupported and resp == "unsupported"):
            return resp
        self._checked(resp)
        raise ProtocolError(f"unexpected answer to {cmd}", resp)

    def _checked(self, resp: str) -> SExpr:
        tree = parse_sexpr(resp) if resp.startswith("(") else resp
        if isinstance(tree, list) and tree and tree[0] == "error":
            raise ProtocolError("solver reported an error", resp)
        return tree

    def _info(self, key: str) -> str:
        self._proc.send(GetInfo(key).render())
        resp = self._proc.read_response(self._io_timeout())
        tree = self._checked(resp)
        if isinstance(tree, list) and len(tree) == 2 and isinstance(tree[1], str):
            return _unquote(tree[1])
        return resp

    def _reason_unknown(self) -> str:
        try:
            text = self._info("reason-unknown")
        except (ProtocolError, ResponseTimeout):
            return "solver"
        if self._interrupted.is_set():
            return "interrupted"
        if "timeout" in text or "canceled" in text:
            return "timeout"
        return "solver"

    def _skolem_name(self, v: str) -> str:
        self._skolems += 1
        return f"{v}!sk{self._skolems}"

    def _query_timeout(self) -> Optional[float]:
        if not self.config.timeout_ms:
            return None
        return (self.config.timeout_ms + self.config.watchdog_grace_ms) / 1000.0

    def _io_timeout(self) -> float:
        return max(10.0, self.config.watchdog_grace_ms / 1000.0)


__all__ = ["SatResult", "SolverInfo", "SolverSession", "parse_sexpr"]
