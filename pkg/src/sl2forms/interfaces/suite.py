from __future__ import annotations

import sqlite3

from ..criteria import SuiteSettings
from ..infrastructure.suite_runner import run_suite as _run_suite
from ..models import SuiteReport


def run_suite(
    conn: sqlite3.Connection | None,
    *,
    p_set: tuple[int, ...] = (2, 3, 5),
    e_max: int = 1,
    seed: int = 0,
    budget: int = 10**6,
    jobs: int = 1,
    run_id_override: str | None = None,
) -> SuiteReport:
    settings = SuiteSettings(p_set=tuple(p_set), e_max=e_max, seed=seed, budget=budget)
    return _run_suite(conn, settings=settings, jobs=jobs, run_id_override=run_id_override)
