"""Infrastructure layer for suite orchestration, persistence and reporting."""

from .reporting import build_report
from .suite_runner import evidence_label, execute_job, run_suite, summarize

__all__ = [
    "build_report",
    "evidence_label",
    "execute_job",
    "run_suite",
    "summarize",
]
