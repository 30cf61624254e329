from __future__ import annotations

import json
from pathlib import Path

import pytest

import sl2forms.infrastructure.suite_runner as runner_module
import sl2forms.utils as utils_module
from sl2forms.cli import main
from sl2forms.criteria import CRITERIA, JobOutcome, SuiteJob, SuiteSettings
from sl2forms.db import SCHEMA_DICTIONARY, connect, db_stats, get_state, init_db, schema_dictionary_missing_entries
from sl2forms.infrastructure import build_report, evidence_label, execute_job, run_suite


def _ok(backend: str = "symbolic") -> JobOutcome:
    return JobOutcome(True, backend, {})


def _boom() -> JobOutcome:
    raise RuntimeError("boom")


def _green_jobs(settings: SuiteSettings) -> list[SuiteJob]:
    return [SuiteJob(card.number, f"job-{card.number}", _ok) for card in CRITERIA]


def _red_jobs(settings: SuiteSettings) -> list[SuiteJob]:
    jobs = _green_jobs(settings)
    jobs.append(SuiteJob(5, "round-trip sharp:IX[e1=0]@p=3", lambda: JobOutcome(False, "exhaustive(q=9)", {"misclassified": ["sharp:XV"]})))
    jobs.append(SuiteJob(7, "explodes", _boom))
    return jobs


def test_schema_dictionary_covers_every_column(tmp_path: Path) -> None:
    conn = connect(str(tmp_path / "ledger.sqlite"))
    init_db(conn)
    assert schema_dictionary_missing_entries(conn) == []
    assert set(SCHEMA_DICTIONARY) == {"suite_runs", "check_results", "app_state"}
    assert db_stats(conn) == {"suite_runs": 0, "check_results": 0, "app_state": 0}
    conn.close()


def test_evidence_label_counts_backends() -> None:
    assert evidence_label(["symbolic", "exhaustive(q=4,16)", "symbolic"]) == "exhaustive(q=4,16) x1, symbolic x2"
    assert evidence_label([]) == "none"


def test_failing_job_is_recorded_not_raised() -> None:
    result = execute_job(SuiteJob(3, "explodes", _boom))
    assert not result.outcome.passed
    assert result.outcome.backend == "error"
    assert result.outcome.payload["error"] == "RuntimeError: boom"


def test_green_run_is_stored_and_marked(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setattr(runner_module, "build_jobs", _green_jobs)
    conn = connect(str(tmp_path / "ledger.sqlite"))
    init_db(conn)
    report = run_suite(conn, settings=SuiteSettings(p_set=(3,), e_max=0), jobs=2, run_id_override="suite_green")
    assert report.passed
    assert [v.criterion for v in report.criteria] == list(range(1, 9))
    assert all(v.jobs == 1 and v.evidence == "symbolic x1" for v in report.criteria)
    assert get_state(conn, "last_green_run_id") == "suite_green"
    run = conn.execute("SELECT status, passed, p_set FROM suite_runs WHERE run_id='suite_green'").fetchone()
    assert (run["status"], run["passed"], run["p_set"]) == ("success", 1, "3")
    assert db_stats(conn)["check_results"] == 8
    conn.close()


def test_red_run_lists_failures_and_keeps_last_green(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    conn = connect(str(tmp_path / "ledger.sqlite"))
    init_db(conn)
    monkeypatch.setattr(runner_module, "build_jobs", _green_jobs)
    run_suite(conn, settings=SuiteSettings(), run_id_override="suite_green")
    monkeypatch.setattr(runner_module, "build_jobs", _red_jobs)
    report = run_suite(conn, settings=SuiteSettings(), run_id_override="suite_red")
    assert not report.passed
    failed = {v.criterion: v.failures for v in report.criteria if not v.passed}
    assert failed == {5: ["round-trip sharp:IX[e1=0]@p=3"], 7: ["explodes"]}
    assert get_state(conn, "last_green_run_id") == "suite_green"

    md = tmp_path / "suite.md"
    out = build_report(conn, run_id="suite_red", md_path=str(md))
    assert out["passed"] is False and out["failed_jobs"] == 2
    text = md.read_text(encoding="utf-8")
    assert "- last_green_run_id: `suite_green`" in text
    assert 'misclassified: ["sharp:XV"]' in text
    assert "RuntimeError: boom" in text
    conn.close()


def test_report_defaults_to_the_latest_finished_run(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    conn = connect(str(tmp_path / "ledger.sqlite"))
    init_db(conn)
    with pytest.raises(ValueError, match="no finished suite run"):
        build_report(conn, md_path=str(tmp_path / "none.md"))
    monkeypatch.setattr(runner_module, "build_jobs", _green_jobs)
    run_suite(conn, settings=SuiteSettings(), run_id_override="suite_only")
    out = build_report(conn, md_path=str(tmp_path / "suite.md"))
    assert out["run_id"] == "suite_only"
    with pytest.raises(ValueError, match="not found"):
        build_report(conn, run_id="suite_missing", md_path=str(tmp_path / "x.md"))
    conn.close()


def test_suite_cli_run_and_report(tmp_path: Path, monkeypatch: pytest.MonkeyPatch, capsys: pytest.CaptureFixture[str]) -> None:
    monkeypatch.setattr(runner_module, "build_jobs", _red_jobs)
    db = str(tmp_path / "ledger.sqlite")
    assert main(["suite", "run", "--db", db, "--run-id", "suite_cli", "--p-set", "3"]) == 1
    captured = capsys.readouterr()
    report = json.loads(captured.out)
    assert report["run_id"] == "suite_cli" and report["passed"] is False
    assert "[suite] start run_id=suite_cli" in captured.err
    assert "suite_ok run_id=suite_cli passed=false failed=5,7" in captured.err

    md = tmp_path / "out" / "suite.md"
    assert main(["suite", "report", "--db", db, "--md", str(md)]) == 1
    out = json.loads(capsys.readouterr().out)
    assert out["schema"] == 1 and out["run_id"] == "suite_cli"
    assert md.exists()


def test_real_property_jobs_pass() -> None:
    settings = SuiteSettings(p_set=(2, 3), e_max=0)
    jobs = [job for job in runner_module.build_jobs(settings) if job.criterion == 8]
    assert [job.key for job in jobs][:2] == ["omega_star_involution", "psi_star_involution"]
    for job in jobs:
        result = execute_job(job)
        assert result.outcome.passed, (job.key, result.outcome.payload)


def test_git_value_falls_back_only_on_git_failures(monkeypatch: pytest.MonkeyPatch) -> None:
    def missing(*args: object, **kwargs: object) -> str:
        raise FileNotFoundError("git")

    monkeypatch.setattr(utils_module.subprocess, "check_output", missing)
    assert utils_module.git_value(["git", "rev-parse", "HEAD"], "unknown") == "unknown"

    def broken(*args: object, **kwargs: object) -> str:
        raise TypeError("bad args")

    monkeypatch.setattr(utils_module.subprocess, "check_output", broken)
    with pytest.raises(TypeError):
        utils_module.git_value(["git", "rev-parse", "HEAD"], "unknown")
