from __future__ import annotations

import json
from pathlib import Path

import pytest

from sl2forms.cli import HANDLERS, build_parser, main


def _run(capsys: pytest.CaptureFixture[str], *argv: str) -> tuple[int, dict, str]:
    code = main(list(argv))
    captured = capsys.readouterr()
    payload = json.loads(captured.out) if captured.out.strip() else {}
    return code, payload, captured.err


def test_parser_knows_every_handler() -> None:
    parser = build_parser()
    choices = parser._subparsers._group_actions[0].choices  # type: ignore[union-attr]
    assert set(choices) == set(HANDLERS)


def test_no_command_prints_help(capsys: pytest.CaptureFixture[str]) -> None:
    assert main([]) == 2
    assert "usage: sl2forms" in capsys.readouterr().out


def test_catalog_borel_entry(capsys: pytest.CaptureFixture[str]) -> None:
    code, payload, err = _run(capsys, "catalog", "--form", "borel:I", "--p", "5", "--params", "e1=0")
    assert code == 0
    assert payload["schema"] == 1
    assert payload["weights"] == [3, 1, -1, -3]
    assert payload["phi_plus"][0][2] == "3*t^2"
    assert payload["phi_minus"][1][0] == "3*s"
    assert "catalog_ok form=borel:I p=5 dim=4" in err


def test_catalog_marks_non_extendable_forms(capsys: pytest.CaptureFixture[str]) -> None:
    code, payload, _ = _run(capsys, "catalog", "--form", "borel:XII", "--p", "2", "--params", "e1=0,d2=0")
    assert code == 0
    assert "phi_minus" not in payload
    assert "admits no extension" in payload["note"]


def test_catalog_star_entry(capsys: pytest.CaptureFixture[str]) -> None:
    code, payload, _ = _run(capsys, "catalog", "--form", "star:IX", "--p", "3", "--params", "e1=1")
    assert code == 0
    assert payload["twists"] == [1]
    assert payload["sigma"][1][1] == "2*b*c + 1"


def test_verify_borel_symbolic(capsys: pytest.CaptureFixture[str]) -> None:
    code, payload, err = _run(capsys, "verify-borel", "--form", "borel:I", "--p", "5", "--params", "e1=0", "--mode", "symbolic")
    assert code == 0
    assert payload["passed"] is True and payload["backend"] == "symbolic"
    assert "verify_ok" in err and "passed=true" in err


def test_verify_borel_opposite_relation(capsys: pytest.CaptureFixture[str]) -> None:
    code, payload, _ = _run(
        capsys, "verify-borel", "--form", "borel:XXIV", "--p", "3", "--params", "e2=0,d2=0", "--relation", "opposite"
    )
    assert code == 0
    assert payload["checked_relations"] == ["opposite_unipotent"]


def test_symbolic_opposite_relation_is_a_config_error(capsys: pytest.CaptureFixture[str]) -> None:
    code, _, err = _run(
        capsys, "verify-borel", "--form", "borel:XXIV", "--p", "3", "--params", "e2=0,d2=0",
        "--relation", "opposite", "--mode", "symbolic",
    )  # fmt: skip
    assert code == 2
    assert "error:" in err and "opposite relation" in err


def test_verify_sl2(capsys: pytest.CaptureFixture[str]) -> None:
    code, payload, _ = _run(capsys, "verify-sl2", "--form", "star:IX", "--p", "3", "--params", "e1=0")
    assert code == 0
    assert payload["checked_relations"] == ["sl2_multiplicative"]


def test_extend_unique_and_inconsistent(capsys: pytest.CaptureFixture[str]) -> None:
    code, payload, err = _run(capsys, "extend", "--form", "borel:XXIV", "--p", "3", "--params", "e2=0,d2=0")
    assert code == 0
    assert payload["status"] == "unique"
    assert payload["phi_minus"][3][0] == "s"
    assert "extend_ok" in err and "status=unique" in err

    code, payload, _ = _run(capsys, "extend", "--form", "borel:XII", "--p", "2", "--params", "e1=0,d2=0")
    assert code == 1
    assert payload["status"] == "inconsistent"
    assert payload["certificate"]["equation"]


def test_invariants(capsys: pytest.CaptureFixture[str]) -> None:
    code, payload, err = _run(capsys, "invariants", "--form", "star:IX", "--p", "3", "--params", "e1=0")
    assert code == 0
    assert payload["d_sigma"] == [1, 1]
    assert "invariants_ok" in err and "q=9" in err


def test_classify_after_random_conjugation(capsys: pytest.CaptureFixture[str]) -> None:
    code, payload, _ = _run(capsys, "classify", "--form", "sharp:IX", "--p", "3", "--params", "e1=0", "--conj", "--seed", "4")
    assert code == 0
    assert payload["form"] == "sharp:IX"
    assert payload["params"] == {"e1": 0}
    assert payload["q"] == 9


def test_decompose_trivial_form(capsys: pytest.CaptureFixture[str]) -> None:
    code, payload, _ = _run(capsys, "decompose", "--form", "sharp:XXVI", "--p", "3")
    assert code == 0
    assert payload["indecomposable"] is False
    assert payload["summands"] == [{"form": "small:1", "params": {}, "multiplicity": 4}]


def test_equiv_exit_codes(capsys: pytest.CaptureFixture[str]) -> None:
    code, payload, _ = _run(
        capsys, "equiv", "--form", "sharp:IX", "--p", "3", "--params", "e1=0", "--form2", "sharp:IX", "--params2", "e1=0", "--conj"
    )
    assert code == 0
    assert payload["equivalent"] is True and payload["conjugator"]

    code, payload, _ = _run(capsys, "equiv", "--form", "sharp:IX", "--p", "3", "--params", "e1=0", "--form2", "sharp:XXVI")
    assert code == 1
    assert payload["equivalent"] is False


def test_out_writes_the_report_to_a_file(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    out = tmp_path / "reports" / "borel.json"
    code = main(["catalog", "--form", "borel:IV", "--p", "5", "--params", "e1=0,e2=1", "--out", str(out)])
    assert code == 0
    assert capsys.readouterr().out == ""
    data = json.loads(out.read_text(encoding="utf-8"))
    assert data["weights"] == [6, 4, -4, -6]


@pytest.mark.parametrize(
    "argv,needle",
    [
        (["catalog", "--form", "borel:I", "--p", "4", "--params", "e1=0"], "prime"),
        (["catalog", "--form", "borel:XXX", "--p", "5"], "unknown borel form"),
        (["catalog", "--form", "borel:I", "--p", "3", "--params", "e1=0"], "requires p >= 5"),
        (["catalog", "--form", "borel:I", "--p", "5", "--params", "e1"], "params must look like"),
        (["invariants", "--form", "star:I", "--p", "5", "--params", "e1=0", "--m", "9"], "m must be in"),
        (["suite", "report"], "needs command=suite and --db"),
    ],
)
def test_bad_input_exits_2_with_an_error_line(argv: list[str], needle: str, capsys: pytest.CaptureFixture[str]) -> None:
    assert main(argv) == 2
    err = capsys.readouterr().err
    assert err.startswith("error:")
    assert needle in err
