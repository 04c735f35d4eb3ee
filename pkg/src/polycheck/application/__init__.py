"""Application orchestration: input -> reduction -> procedure portfolio -> report."""
from __future__ import annotations

from .runner import Portfolio, answer, run

__all__ = ["Portfolio", "answer", "run"]
