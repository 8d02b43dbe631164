from __future__ import annotations

import json
from collections.abc import Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import TYPE_CHECKING, Any, Literal

import numpy as np
from pydantic import BaseModel, Field, TypeAdapter

from . import _debug
from .exceptions import CheckFailed
from .tracing.logger import logger
from .util._json import validate_json
from .version import build_id

if TYPE_CHECKING:
    from .run_config import RunConfig

CheckStatus = Literal["pass", "fail", "inconclusive"]


def fraction_str(value: Fraction | int) -> str:
    """Exact rational as ``"p/q"`` (the denominator is always written)."""
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


def to_jsonable(value: Any) -> Any:
    """Convert domain values into plain JSON data.

    Fractions become ``"p/q"`` strings, ``AlgNum`` values become ``{"a": ..., "b": ...}``,
    numpy scalars and arrays become Python numbers and lists.
    """
    if hasattr(value, "to_json_dict"):
        return to_jsonable(value.to_json_dict())
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, Fraction):
        return fraction_str(value)
    if isinstance(value, (int, float)):
        return value
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, Mapping):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"Cannot encode {type(value).__name__} for a report")


class CheckReport(BaseModel):
    """Machine-readable outcome of one verification check."""

    check: str
    """Name of the check, e.g. ``"fix-prop"``."""

    params: dict[str, Any]
    """Check parameters. Always contains ``build`` and ``config``."""

    status: CheckStatus
    """``"pass"``, ``"fail"`` or ``"inconclusive"``."""

    cases_total: int = 0
    cases_failed: int = 0

    first_failure: dict[str, Any] | None = None
    """Data of the first failing case in enumeration order, if any."""

    data: dict[str, Any] = Field(default_factory=dict)
    """Check-specific payload (constants found, per-class values, ...)."""

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def raise_for_status(self) -> CheckReport:
        """Return ``self`` when the check passed, otherwise raise ``CheckFailed``."""
        if not self.passed:
            raise CheckFailed(self)
        return self

    def to_json(self) -> str:
        return json.dumps(self.model_dump(mode="json"), sort_keys=True, indent=2) + "\n"

    def write(self, directory: Path, name: str | None = None) -> Path:
        """Write ``<directory>/<name>.json`` (``name`` defaults to the check name) and return
        the path."""
        directory.mkdir(parents=True, exist_ok=True)
        path = directory / f"{name or self.check}.json"
        path.write_text(self.to_json(), encoding="utf-8")
        return path

    @classmethod
    def from_json(cls, text: str | bytes) -> CheckReport:
        return validate_json(text, _report_adapter)


_report_adapter = TypeAdapter(CheckReport)


@dataclass
class CaseTally:
    """Accumulates the cases of one check in enumeration order and builds its report."""

    check: str
    params: dict[str, Any] = field(default_factory=dict)
    config: RunConfig | None = None

    cases_total: int = 0
    cases_failed: int = 0
    first_failure: dict[str, Any] | None = None

    def record(self, ok: bool, **case: Any) -> bool:
        self.cases_total += 1
        if not ok:
            self.cases_failed += 1
            if self.first_failure is None:
                self.first_failure = to_jsonable(case)
                logger.warning("%s: first failing case %s", self.check, self.first_failure)
            elif _debug.LOG_CASE_DATA:
                logger.warning("%s: failing case %s", self.check, to_jsonable(case))
        return ok

    def report(self, data: Mapping[str, Any] | None = None, *, inconclusive: bool = False) -> CheckReport:
        from .run_config import RunConfig

        config = self.config if self.config is not None else RunConfig()
        if self.cases_failed:
            status: CheckStatus = "fail"
        elif inconclusive:
            status = "inconclusive"
        else:
            status = "pass"
        params = to_jsonable(self.params)
        params["build"] = build_id()
        params["config"] = config.to_json_dict()
        return CheckReport(
            check=self.check,
            params=params,
            status=status,
            cases_total=self.cases_total,
            cases_failed=self.cases_failed,
            first_failure=self.first_failure,
            data=to_jsonable(dict(data or {})),
        )
