from __future__ import annotations

from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from quatvar.algnum import AlgNum
from quatvar.exceptions import CheckFailed, UserError
from quatvar.report import CaseTally, CheckReport, fraction_str, to_jsonable
from quatvar.run_config import RunConfig
from quatvar.tracing import CollectingProcessor, add_trace_processor, check_span, get_current_span, set_trace_processors
from quatvar.tracing import _processors as active_processors
from quatvar.version import build_id


def test_to_jsonable() -> None:
    assert fraction_str(3) == "3/1"
    assert to_jsonable(Fraction(3, 6)) == "1/2"
    assert to_jsonable(np.int64(7)) == 7
    assert to_jsonable(np.array([[1, 2], [3, 4]])) == [[1, 2], [3, 4]]
    assert to_jsonable({1: (Fraction(1), AlgNum(0, 1))}) == {"1": ["1/1", {"a": "0/1", "b": "1/1"}]}
    assert to_jsonable(Path("reports")) == "reports"
    with pytest.raises(TypeError):
        to_jsonable(object())


def test_tally_keeps_the_first_failure() -> None:
    tally = CaseTally("demo", {"N": 2})
    tally.record(True, n=1)
    tally.record(False, n=2, value=Fraction(1, 3))
    tally.record(False, n=3)
    report = tally.report({"total": Fraction(5)})
    assert report.status == "fail"
    assert (report.cases_total, report.cases_failed) == (3, 2)
    assert report.first_failure == {"n": 2, "value": "1/3"}
    assert report.data == {"total": "5/1"}
    assert report.params["N"] == 2
    assert report.params["build"] == build_id()
    with pytest.raises(CheckFailed) as info:
        report.raise_for_status()
    assert info.value.report is report


def test_inconclusive_only_without_failures() -> None:
    tally = CaseTally("inner")
    tally.record(True, x=1)
    assert tally.report(inconclusive=True).status == "inconclusive"
    tally.record(False, x=2)
    assert tally.report(inconclusive=True).status == "fail"
    assert tally.first_failure == {"x": 2}


def test_report_json_round_trip(tmp_path: Path) -> None:
    config = RunConfig(dmax=450, output=tmp_path)
    tally = CaseTally("t9", {"dmax": 450}, config)
    tally.record(True, d=1)
    report = tally.report({"c": AlgNum(Fraction(1, 2), 3)})
    assert report.raise_for_status() is report
    assert report.params["config"]["dmax"] == 450
    assert "output" not in report.params["config"]

    path = report.write(tmp_path, "t9-N2")
    assert path == tmp_path / "t9-N2.json"
    assert CheckReport.from_json(path.read_text()) == report
    assert report.write(tmp_path).name == "t9.json"


def test_invalid_report_json() -> None:
    with pytest.raises(UserError):
        CheckReport.from_json('{"check": "x"}')


def test_check_span_records_errors() -> None:
    collector = CollectingProcessor()
    previous = list(active_processors)
    add_trace_processor(collector)
    try:
        with check_span("outer", N=2) as outer:
            assert get_current_span() is outer
            with pytest.raises(UserError):
                with check_span("inner"):
                    raise UserError("boom")
        finished = [(span.name, span.depth, span.error) for span in collector.finished]
    finally:
        set_trace_processors(previous)
    assert get_current_span() is None
    assert finished[0][:2] == ("inner", 1)
    assert finished[0][2] is not None and finished[0][2]["message"] == "boom"
    assert finished[1] == ("outer", 0, None)
