from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from .report import CheckReport


class QuatVarException(Exception):
    """Base class for all exceptions raised by quatvar."""


class UserError(QuatVarException):
    """Exception raised when the caller passes invalid arguments."""

    message: str

    def __init__(self, message: str):
        self.message = message
        super().__init__(message)


class UnsupportedConfiguration(QuatVarException):
    """Exception raised for a configuration outside the shipped construction, e.g. a ramified
    prime that is not 3 mod 4.
    """

    message: str

    def __init__(self, message: str):
        self.message = message
        super().__init__(message)


class StabilizationError(QuatVarException):
    """Exception raised when the stable-lattice iteration of a 2-adic splitting does not settle.
    This signals a logic bug, never a data case.
    """

    message: str

    def __init__(self, message: str):
        self.message = message
        super().__init__(message)


class ConvergenceError(QuatVarException):
    """Exception raised when a truncated local-integral sum misses its tolerance within the cap."""

    message: str

    def __init__(self, message: str):
        self.message = message
        super().__init__(message)


class CheckFailed(QuatVarException):
    """Exception raised when a verification check that was required to pass did not."""

    report: CheckReport
    """The report of the failing check."""

    def __init__(self, report: CheckReport):
        self.report = report
        super().__init__(
            f"Check {report.check} finished with status {report.status} "
            f"({report.cases_failed}/{report.cases_total} cases failed)"
        )
