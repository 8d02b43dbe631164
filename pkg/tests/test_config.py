from __future__ import annotations

from pathlib import Path

import pytest

from quatvar import _config
from quatvar._debug import _debug_flag_enabled
from quatvar.exceptions import UnsupportedConfiguration, UserError
from quatvar.run_config import RunConfig


def test_defaults_validate() -> None:
    config = RunConfig().validate()
    assert config.ramified_prime == 23
    assert config.torsion_precision_slack == 2


@pytest.mark.parametrize(
    ("kwargs", "error"),
    [
        ({"ramified_prime": 21}, UserError),
        ({"ramified_prime": 2}, UserError),
        ({"ramified_prime": 13}, UnsupportedConfiguration),
        ({"torsion_precision_slack": 0}, UserError),
        ({"dmax": 0}, UserError),
        ({"N": -1}, UserError),
    ],
)
def test_invalid_configurations(kwargs: dict, error: type[Exception]) -> None:
    with pytest.raises(error):
        RunConfig(**kwargs).validate()


def test_resolve_overlays_non_defaults() -> None:
    base = RunConfig(dmax=450, N=3)
    merged = base.resolve(RunConfig(nmax=99, output=Path("elsewhere")))
    assert (merged.dmax, merged.N, merged.nmax) == (450, 3, 99)
    assert merged.output == Path("elsewhere")
    assert base.resolve(None) is base


def test_with_bounds_fills_only_unset_values() -> None:
    config = RunConfig(dmax=900).with_bounds(dmax=450, nmax=99)
    assert (config.dmax, config.nmax) == (900, 99)


def test_json_dict_leaves_out_the_output_directory() -> None:
    payload = RunConfig(output=Path("a")).to_json_dict()
    assert "output" not in payload
    assert payload == RunConfig(output=Path("b")).to_json_dict()


def test_default_threads(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setattr(_config, "_dotenv_loaded", True)
    monkeypatch.setenv("QUATVAR_THREADS", "3")
    assert _config.default_threads() == 3
    monkeypatch.setenv("QUATVAR_THREADS", "")
    assert _config.default_threads() >= 1
    for bad in ("0", "many"):
        monkeypatch.setenv("QUATVAR_THREADS", bad)
        with pytest.raises(UserError):
            _config.default_threads()


@pytest.mark.parametrize(("value", "expected"), [("1", True), ("TRUE", True), ("0", False), (None, False)])
def test_debug_flags(monkeypatch: pytest.MonkeyPatch, value: str | None, expected: bool) -> None:
    if value is None:
        monkeypatch.delenv("QUATVAR_TEST_FLAG", raising=False)
    else:
        monkeypatch.setenv("QUATVAR_TEST_FLAG", value)
    assert _debug_flag_enabled("QUATVAR_TEST_FLAG") is expected
