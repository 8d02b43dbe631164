from __future__ import annotations

import dataclasses
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any, Literal

from .exceptions import UnsupportedConfiguration, UserError


@dataclass(frozen=True)
class RunConfig:
    """Settings of one CLI run.

    Per-command bounds default to ``None``, meaning "use the command's own default". The
    thread count is deliberately absent: it comes from ``QUATVAR_THREADS`` and never changes a
    result, so it never appears in a report.
    """

    ramified_prime: int = 23
    """The finite prime at which B ramifies. Must be 3 mod 4 for the shipped order."""

    torsion_precision_slack: int = 2
    """Torsion level used for Fix computations at parameter N is ``N + slack``."""

    dmax: int | None = None
    """Largest discriminant D for theta tables and the T(9) check."""

    nmax: int | None = None
    """Largest n for Brandt matrices and the seesaw identity."""

    xmax: int | None = None
    """Largest x for the arithmetic-variance partial sums."""

    N: int | None = None
    """Tree depth / finite-ring level."""

    output: Path = Path("reports")
    """Directory receiving ``<check>.json`` reports."""

    format: Literal["json", "csv"] = "json"
    """Format of data exports (theta tables)."""

    def resolve(self, override: RunConfig | None) -> RunConfig:
        """Produce a new RunConfig by overlaying any non-default values from the
        override on top of this instance."""
        if override is None:
            return self

        defaults = RunConfig()
        changes = {
            field.name: getattr(override, field.name)
            for field in fields(self)
            if getattr(override, field.name) is not None
            and getattr(override, field.name) != getattr(defaults, field.name)
        }
        return replace(self, **changes)

    def with_bounds(self, **bounds: int | None) -> RunConfig:
        """Fill per-command bounds that are still unset."""
        changes = {k: v for k, v in bounds.items() if getattr(self, k) is None and v is not None}
        return replace(self, **changes)

    def validate(self) -> RunConfig:
        p = self.ramified_prime
        if p < 3 or any(p % d == 0 for d in range(2, int(p**0.5) + 1)):
            raise UserError(f"ramified_prime must be an odd prime, got {p}")
        if p % 4 != 3:
            raise UnsupportedConfiguration(
                f"ramified prime {p} is not 3 mod 4; the shipped maximal-order construction "
                "needs p = 3 (mod 4)"
            )
        if self.torsion_precision_slack < 1:
            raise UserError("torsion_precision_slack must be at least 1")
        for name in ("dmax", "nmax", "xmax", "N"):
            value = getattr(self, name)
            if value is not None and value <= 0:
                raise UserError(f"{name} must be positive, got {value}")
        return self

    def to_json_dict(self) -> dict[str, Any]:
        """The effective settings as they appear in every report. ``output`` is left out so
        that reports written to different directories stay byte-identical."""
        dataclass_dict = dataclasses.asdict(self)
        dataclass_dict.pop("output")
        return dataclass_dict
