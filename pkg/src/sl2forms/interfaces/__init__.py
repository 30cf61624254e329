"""Public interfaces for suite and report flows."""

from .report import build_report
from .suite import run_suite

__all__ = ["build_report", "run_suite"]
