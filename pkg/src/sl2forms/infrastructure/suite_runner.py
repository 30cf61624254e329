from __future__ import annotations

import logging
import sqlite3
import sys
import time
import uuid
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any

from ..criteria import JobOutcome, SuiteJob, SuiteSettings, all_criteria, build_jobs
from ..db import set_state
from ..models import CriterionVerdict, SuiteReport
from ..utils import git_commit, jdump, now_utc, status_line

logger = logging.getLogger(__name__)

MAX_LISTED_FAILURES = 20


@dataclass(frozen=True)
class JobResult:
    job: SuiteJob
    outcome: JobOutcome
    seconds: float


def execute_job(job: SuiteJob) -> JobResult:
    """Исключение задания означает провал этого задания, а не всего запуска."""

    started = time.perf_counter()
    try:
        outcome = job.run()
    except Exception as exc:  # noqa: BLE001
        logger.debug("job %s failed", job.key, exc_info=True)
        outcome = JobOutcome(False, "error", {"error": f"{type(exc).__name__}: {exc}"})
    return JobResult(job, outcome, time.perf_counter() - started)


def _insert_run(conn: sqlite3.Connection, *, run_id: str, settings: SuiteSettings) -> None:
    conn.execute(
        """
        INSERT INTO suite_runs(
          run_id, p_set, e_max, seed, budget, git_commit, status,
          passed, started_at_utc, finished_at_utc, summary_json
        ) VALUES(?, ?, ?, ?, ?, ?, 'running', 0, ?, '', '{}')
        """,
        (
            run_id,
            ",".join(str(p) for p in settings.p_set),
            int(settings.e_max),
            int(settings.seed),
            int(settings.budget),
            git_commit(),
            now_utc(),
        ),
    )
    conn.commit()


def _finish_run(conn: sqlite3.Connection, *, run_id: str, status: str, passed: bool, summary: dict[str, Any]) -> None:
    conn.execute(
        "UPDATE suite_runs SET status=?, passed=?, finished_at_utc=?, summary_json=? WHERE run_id=?",
        (status, int(passed), now_utc(), jdump(summary), run_id),
    )
    conn.commit()


def _store_results(conn: sqlite3.Connection, *, run_id: str, results: list[JobResult]) -> None:
    conn.executemany(
        """
        INSERT INTO check_results(
          run_id, criterion, job_key, job_order, passed, backend,
          payload_json, seconds, created_at_utc
        ) VALUES(?, ?, ?, ?, ?, ?, ?, ?, ?)
        """,
        [
            (
                run_id,
                r.job.criterion,
                r.job.key,
                order,
                int(r.outcome.passed),
                r.outcome.backend,
                jdump(r.outcome.payload),
                round(r.seconds, 6),
                now_utc(),
            )
            for order, r in enumerate(results)
        ],
    )
    conn.commit()


def evidence_label(backends: list[str]) -> str:
    """Сводка уровней свидетельства: `symbolic x12, exhaustive(q=4,16) x3`."""

    counts = Counter(backends)
    return ", ".join(f"{name} x{n}" for name, n in sorted(counts.items())) or "none"


def summarize(results: list[JobResult]) -> list[CriterionVerdict]:
    verdicts: list[CriterionVerdict] = []
    for card in all_criteria():
        mine = [r for r in results if r.job.criterion == card.number]
        failed = [r for r in mine if not r.outcome.passed]
        verdicts.append(
            CriterionVerdict(
                criterion=card.number,
                title=card.title,
                passed=bool(mine) and not failed,
                jobs=len(mine),
                failures=[r.job.key for r in failed[:MAX_LISTED_FAILURES]],
                evidence=evidence_label([r.outcome.backend for r in mine]),
                seconds=round(sum(r.seconds for r in mine), 6),
            )
        )
    return verdicts


def run_suite(
    conn: sqlite3.Connection | None,
    *,
    settings: SuiteSettings,
    jobs: int = 1,
    run_id_override: str | None = None,
) -> SuiteReport:
    """Прогоняет приемочный набор; при conn пишет запуск и результаты в ledger.

    Задания выполняются в пуле потоков, порядок результатов совпадает с
    порядком заданий. Запись в SQLite идет только из вызывающего потока.
    """

    run_id = run_id_override or f"suite_{uuid.uuid4().hex[:12]}"
    job_list = build_jobs(settings)
    started_at = now_utc()
    if conn is not None:
        _insert_run(conn, run_id=run_id, settings=settings)

    print(
        status_line(
            "[suite] start",
            run_id=run_id,
            jobs=len(job_list),
            workers=jobs,
            p_set=",".join(str(p) for p in settings.p_set),
            e_max=settings.e_max,
            seed=settings.seed,
        ),
        file=sys.stderr,
    )

    status = "failed"
    passed = False
    summary: dict[str, Any] = {"jobs": len(job_list)}
    try:
        with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
            results = list(pool.map(execute_job, job_list))
        if conn is not None:
            _store_results(conn, run_id=run_id, results=results)
        verdicts = summarize(results)
        passed = all(v.passed for v in verdicts)
        for v in verdicts:
            print(
                status_line(
                    f"[suite] criterion={v.criterion}",
                    passed=v.passed,
                    jobs=v.jobs,
                    failed=len(v.failures),
                    seconds=f"{v.seconds:.2f}",
                ),
                file=sys.stderr,
            )
        summary["criteria"] = {str(v.criterion): v.passed for v in verdicts}
        summary["failed_jobs"] = sum(1 for r in results if not r.outcome.passed)
        report = SuiteReport(
            run_id=run_id,
            p_set=list(settings.p_set),
            e_max=settings.e_max,
            seed=settings.seed,
            passed=passed,
            criteria=verdicts,
            started_at=started_at,
            finished_at=now_utc(),
        )
        status = "success"
        if conn is not None and passed:
            set_state(conn, "last_green_run_id", run_id)
        return report
    except Exception as exc:
        summary["error"] = f"{type(exc).__name__}: {exc}"
        raise
    finally:
        if conn is not None:
            _finish_run(conn, run_id=run_id, status=status, passed=passed, summary=summary)
        print(status_line("[suite] done", run_id=run_id, status=status, passed=passed), file=sys.stderr)
