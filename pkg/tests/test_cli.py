from __future__ import annotations

import csv
import json
from pathlib import Path

import pytest

from quatvar.cli import main
from quatvar.report import CheckReport


def test_constants_command(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["--output", str(tmp_path), "constants"]) == 0
    printed = json.loads(capsys.readouterr().out)
    assert printed["theta_norm_sq"] == 0.5
    assert json.loads((tmp_path / "constants.json").read_text()) == printed


def test_classset_command(tmp_path: Path) -> None:
    assert main(["--output", str(tmp_path), "classset"]) == 0
    payload = json.loads((tmp_path / "classset.json").read_text())
    assert [c["w"] for c in payload["classes"]] == [1, 2, 3]


def test_brandt_command(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["--output", str(tmp_path), "brandt", "--n", "2"]) == 0
    assert capsys.readouterr().out.splitlines() == ["1 1 1", "2 1 0", "3 0 0"]
    assert (tmp_path / "brandt-n2.json").exists()


@pytest.mark.parametrize(
    ("argv", "report_name"),
    [
        (["verify", "triples"], "triples"),
        (["verify", "brandt"], "brandt"),
        (["verify", "fix-prop", "--N", "2"], "fix-prop"),
        (["verify", "fix-closed-form", "--N", "2"], "fix-closed-form"),
        (["verify", "mean", "--N", "2"], "mean"),
        (["verify", "rallis"], "rallis"),
        (["eigen"], "eigen"),
    ],
)
def test_verify_writes_passing_reports(tmp_path: Path, argv: list[str], report_name: str) -> None:
    assert main(["--output", str(tmp_path), *argv]) == 0
    report = CheckReport.from_json((tmp_path / f"{report_name}.json").read_text())
    assert report.passed
    assert "output" not in report.params["config"]


def test_fix_command(tmp_path: Path) -> None:
    assert main(["--output", str(tmp_path), "fix", "--N", "2"]) == 0
    table = json.loads((tmp_path / "fix-N2.json").read_text())
    assert table["N"] == 2
    assert set(table["classes"]) == {"E1", "E2", "E3"}


def test_theta_csv_export(tmp_path: Path) -> None:
    assert main(["--output", str(tmp_path), "--format", "csv", "theta", "--dmax", "30", "--k", "2"]) == 0
    with (tmp_path / "theta-k2.csv").open(newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["D", "mu_E1", "mu_E2", "mu_E3", "muPsi_a", "muPsi_b"]
    assert len(rows) == 32
    assert rows[1][:4] == ["0", "3", "3", "3"]


@pytest.mark.parametrize(
    "argv",
    [
        ["--prime", "19", "eigen"],
        ["--prime", "19", "verify", "triples"],
        ["--prime", "13", "classset"],
        ["--prime", "15", "constants"],
        ["brandt", "--n", "0"],
        ["verify", "t9", "--dmax", "100"],
        ["bogus"],
        [],
    ],
)
def test_usage_errors_exit_with_two(tmp_path: Path, argv: list[str]) -> None:
    assert main(["--output", str(tmp_path), *argv]) == 2


def test_fix_prop_counts_only_the_exhaustive_cases(tmp_path: Path) -> None:
    assert main(["--output", str(tmp_path), "verify", "fix-prop", "--N", "2"]) == 0
    report = CheckReport.from_json((tmp_path / "fix-prop.json").read_text())
    assert report.cases_total == 96
    config = report.params["config"]
    assert (config["N"], config["nmax"], config["dmax"]) == (2, 99, 450)
