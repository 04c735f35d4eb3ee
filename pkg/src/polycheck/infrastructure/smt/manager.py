from __future__ import annotations

import logging
import os
import shutil
import sysconfig
import warnings
from pathlib import Path
from typing import Iterator, List, Optional

from polycheck.core.config.settings import SOLVER_ENV_VAR, SolverConfig
from polycheck.domain.exceptions import SessionDeadError

from .session import SolverSession

log = logging.getLogger(__name__)


def _candidates(config: SolverConfig) -> Iterator[str]:
    env = os.environ.get(SOLVER_ENV_VAR)
    if env:
        yield env
    yield config.path


def _executable(path: str) -> Optional[str]:
    p = Path(path)
    if p.is_file() and os.access(p, os.X_OK):
        return str(p)
    return None


def locate_solver(config: Optional[SolverConfig] = None) -> Optional[str]:
    """
    Resolve the solver executable: the environment override, then the
    configured path (absolute, relative or looked up on PATH), then the
    scripts directory of the running interpreter (where the z3-solver wheel
    installs `z3`).
    """
    config = config or SolverConfig()
    tried: List[str] = []
    for cand in _candidates(config):
        tried.append(cand)
        if os.sep in cand or (os.altsep and os.altsep in cand):
            found = _executable(cand)
        else:
            found = shutil.which(cand)
        if found:
            return found

    name = Path(config.path).name
    scripts = sysconfig.get_path("scripts")
    if scripts:
        for suffix in ("", ".exe"):
            found = _executable(os.path.join(scripts, name + suffix))
            if found:
                warnings.warn(
                    f"solver {config.path!r} not on PATH; using {found}.",
                    RuntimeWarning,
                )
                return found
    log.debug("no solver executable among %s", tried)
    return None


class SolverContext:
    """
    `with SolverContext(config) as session:` starts a solver session and
    always stops the child process on exit.
    """

    def __init__(self, config: Optional[SolverConfig] = None, *, path: Optional[str] = None):
        self.config = config or SolverConfig()
        self.path = path
        self._session: Optional[SolverSession] = None

    def __enter__(self) -> SolverSession:
        path = self.path or locate_solver(self.config)
        if path is None:
            raise SessionDeadError(
                f"no solver executable found (set {SOLVER_ENV_VAR} or install z3-solver)"
            )
        self._session = SolverSession(self.config, path=path)
        try:
            return self._session.start()
        except BaseException:
            self._session.stop()
            raise

    def __exit__(self, exc_type, exc, tb) -> None:
        if self._session is not None:
            self._session.stop()
            self._session = None


__all__ = ["SolverContext", "locate_solver"]
