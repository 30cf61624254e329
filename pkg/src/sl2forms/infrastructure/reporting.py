from __future__ import annotations

import json
import sqlite3
from pathlib import Path
from typing import Any

from ..criteria import all_criteria
from ..db import get_state
from ..utils import ensure_parent
from .suite_runner import evidence_label


def _md_cell(text: str, max_len: int = 120) -> str:
    clipped = text.replace("\n", " ").strip()
    if len(clipped) > max_len:
        clipped = clipped[: max(0, max_len - 1)] + "…"
    return clipped.replace("|", "\\|")


def _failure_reason(payload_json: str) -> str:
    payload = json.loads(payload_json or "{}")
    for key in ("error", "counterexample", "misclassified", "clashes", "failures"):
        if payload.get(key):
            return f"{key}: {json.dumps(payload[key], ensure_ascii=False)}"
    if "expected" in payload:
        got = payload.get("summands", payload.get("d", payload.get("status")))
        return f"expected {json.dumps(payload['expected'])}, got {json.dumps(got)}"
    return "failed"


def _resolve_run(conn: sqlite3.Connection, run_id: str | None) -> str:
    if run_id is not None:
        if conn.execute("SELECT 1 FROM suite_runs WHERE run_id=?", (run_id,)).fetchone() is None:
            raise ValueError(f"suite run {run_id!r} not found")
        return run_id
    row = conn.execute(
        "SELECT run_id FROM suite_runs WHERE status='success' ORDER BY started_at_utc DESC LIMIT 1"
    ).fetchone()
    if row is None:
        raise ValueError("no finished suite run found; run `sl2forms suite run --db ...` first")
    return str(row["run_id"])


def build_report(
    conn: sqlite3.Connection,
    *,
    run_id: str | None = None,
    md_path: str = "artifacts/suite.md",
) -> dict[str, Any]:
    run_id = _resolve_run(conn, run_id)
    run = conn.execute("SELECT * FROM suite_runs WHERE run_id=?", (run_id,)).fetchone()
    rows = conn.execute(
        """
        SELECT criterion, job_key, passed, backend, payload_json, seconds
        FROM check_results
        WHERE run_id=?
        ORDER BY job_order
        """,
        (run_id,),
    ).fetchall()
    last_green = get_state(conn, "last_green_run_id")

    criteria: list[dict[str, Any]] = []
    for card in all_criteria():
        mine = [row for row in rows if int(row["criterion"]) == card.number]
        failed = [row for row in mine if not int(row["passed"])]
        criteria.append(
            {
                "criterion": card.number,
                "title": card.title,
                "passed": bool(mine) and not failed,
                "jobs": len(mine),
                "failed": len(failed),
                "evidence": evidence_label([str(row["backend"]) for row in mine]),
                "seconds": round(sum(float(row["seconds"]) for row in mine), 3),
            }
        )

    ensure_parent(md_path)
    lines = [
        "# sl2forms acceptance suite",
        "",
        f"- run_id: `{run_id}`",
        f"- status: `{run['status']}`",
        f"- passed: `{bool(run['passed'])}`",
        f"- p_set: `{run['p_set']}`",
        f"- e_max: `{run['e_max']}`",
        f"- seed: `{run['seed']}`",
        f"- budget: `{run['budget']}`",
        f"- git_commit: `{run['git_commit']}`",
        f"- started_at_utc: `{run['started_at_utc']}`",
        f"- finished_at_utc: `{run['finished_at_utc']}`",
        f"- last_green_run_id: `{last_green or '-'}`",
        "",
        "## Criteria",
        "",
        "| # | criterion | passed | jobs | failed | evidence | seconds |",
        "|---:|---|---|---:|---:|---|---:|",
    ]
    for item in criteria:
        mark = "yes" if item["passed"] else "NO"
        lines.append(
            f"| {item['criterion']} | {item['title']} | {mark} | {item['jobs']} | {item['failed']} | "
            f"`{_md_cell(item['evidence'], 80)}` | {item['seconds']:.3f} |"
        )

    failures = [row for row in rows if not int(row["passed"])]
    lines.extend(["", "## Failed jobs", ""])
    if failures:
        lines.extend(["| # | job | backend | reason |", "|---:|---|---|---|"])
        for row in failures:
            lines.append(
                f"| {row['criterion']} | `{_md_cell(str(row['job_key']), 80)}` | `{row['backend']}` | "
                f"{_md_cell(_failure_reason(str(row['payload_json'])))} |"
            )
    else:
        lines.append("- none")

    Path(md_path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return {
        "run_id": run_id,
        "passed": bool(run["passed"]),
        "criteria": criteria,
        "failed_jobs": len(failures),
        "md_path": md_path,
    }
