from __future__ import annotations

import collections
import logging
import os
import queue
import signal
import subprocess
import threading
from dataclasses import dataclass
from typing import Deque, List, Optional, Sequence

from polycheck.domain.exceptions import ProtocolError, SessionDeadError, SolverError

log = logging.getLogger(__name__)

_EOF = object()


class ResponseTimeout(SolverError):
    """No complete response arrived before the deadline."""


def paren_balance(text: str) -> int:
    """Open-minus-close parentheses, ignoring |quoted| symbols and "strings"."""
    depth = 0
    in_bar = in_str = False
    for ch in text:
        if in_bar:
            in_bar = ch != "|"
        elif in_str:
            in_str = ch != '"'
        elif ch == "|":
            in_bar = True
        elif ch == '"':
            in_str = True
        elif ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
    return depth


@dataclass(frozen=True)
class ProcessSpec:
    path: str
    args: Sequence[str]

    @property
    def argv(self) -> List[str]:
        return [self.path, *self.args]


class SolverProcess:
    """
    Thin wrapper around a solver child process speaking SMT-LIB on its pipes.
    Responses are read by a background thread so that reads can time out.
    """

    def __init__(self, spec: ProcessSpec, *, trace: bool = False, stderr_lines: int = 50):
        self.spec = spec
        self.trace = trace
        self._proc: Optional[subprocess.Popen] = None
        self._lines: "queue.Queue[object]" = queue.Queue()
        self._stderr: Deque[str] = collections.deque(maxlen=stderr_lines)
        self._threads: List[threading.Thread] = []

    # -----------------------
    # Lifecycle
    # -----------------------
    def start(self) -> None:
        if self.alive:
            return
        self._lines = queue.Queue()
        try:
            self._proc = subprocess.Popen(
                self.spec.argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.PIPE,
                text=True,
                bufsize=1,
            )
        except OSError as exc:
            raise SessionDeadError(f"cannot start solver {self.spec.path!r}: {exc}") from exc
        log.debug("solver started: %s (pid %s)", " ".join(self.spec.argv), self._proc.pid)
        out = threading.Thread(target=self._pump_stdout, args=(self._proc, self._lines), daemon=True)
        err = threading.Thread(target=self._pump_stderr, args=(self._proc,), daemon=True)
        out.start()
        err.start()
        self._threads = [out, err]

    @property
    def alive(self) -> bool:
        return self._proc is not None and self._proc.poll() is None

    @property
    def pid(self) -> Optional[int]:
        return None if self._proc is None else self._proc.pid

    def stop(self, timeout: float = 1.0) -> None:
        proc = self._proc
        if proc is None:
            return
        try:
            if proc.poll() is None and proc.stdin is not None:
                try:
                    proc.stdin.write("(exit)\n")
                    proc.stdin.flush()
                except (BrokenPipeError, OSError, ValueError):
                    pass
                try:
                    proc.wait(timeout=timeout)
                except subprocess.TimeoutExpired:
                    proc.kill()
                    proc.wait()
        finally:
            self._close_pipes(proc)
            self._proc = None

    def kill(self) -> None:
        proc = self._proc
        if proc is None:
            return
        if proc.poll() is None:
            proc.kill()
            proc.wait()
        self._close_pipes(proc)
        self._proc = None

    def send_interrupt(self) -> None:
        proc = self._proc
        if proc is None or proc.poll() is not None:
            return
        if os.name == "posix":
            proc.send_signal(signal.SIGINT)
        else:
            proc.kill()

    # -----------------------
    # I/O
    # -----------------------
    def send(self, text: str) -> None:
        proc = self._proc
        if proc is None or proc.stdin is None:
            raise SessionDeadError("solver is not running", self.stderr_tail())
        if self.trace:
            log.debug(">> %s", text)
        try:
            proc.stdin.write(text + "\n")
            proc.stdin.flush()
        except (BrokenPipeError, OSError, ValueError) as exc:
            raise SessionDeadError(f"solver pipe closed: {exc}", self.stderr_tail()) from exc

    def read_response(self, timeout: Optional[float] = None) -> str:
        """One complete response: a bare token or a balanced s-expression."""
        chunks: List[str] = []
        depth = 0
        while True:
            try:
                item = self._lines.get(timeout=timeout)
            except queue.Empty:
                raise ResponseTimeout() from None
            if item is _EOF:
                raise SessionDeadError("solver exited", self.stderr_tail())
            line = str(item).rstrip("\r\n")
            if not chunks and not line.strip():
                continue
            chunks.append(line)
            depth += paren_balance(line)
            if depth < 0:
                raise ProtocolError("unbalanced solver response", "\n".join(chunks))
            if depth == 0:
                text = "\n".join(chunks).strip()
                if self.trace:
                    log.debug("<< %s", text)
                return text

    def stderr_tail(self) -> str:
        return "\n".join(self._stderr)

    # -----------------------
    # Internal helpers
    # -----------------------
    @staticmethod
    def _pump_stdout(proc: subprocess.Popen, sink: "queue.Queue[object]") -> None:
        try:
            assert proc.stdout is not None
            for line in proc.stdout:
                sink.put(line)
        except (OSError, ValueError):
            pass
        finally:
            sink.put(_EOF)

    def _pump_stderr(self, proc: subprocess.Popen) -> None:
        try:
            assert proc.stderr is not None
            for line in proc.stderr:
                self._stderr.append(line.rstrip("\n"))
        except (OSError, ValueError):
            pass

    @staticmethod
    def _close_pipes(proc: subprocess.Popen) -> None:
        for pipe in (proc.stdin, proc.stdout, proc.stderr):
            try:
                if pipe is not None:
                    pipe.close()
            except OSError:
                pass


__all__ = ["ProcessSpec", "ResponseTimeout", "SolverProcess", "paren_balance"]
