import os


def _debug_flag_enabled(flag: str) -> bool:
    flag_value = os.getenv(flag)
    return flag_value is not None and (flag_value == "1" or flag_value.lower() == "true")


DEBUG = _debug_flag_enabled("QUATVAR_DEBUG")
"""Switches the CLI log level to DEBUG."""

LOG_CASE_DATA = _debug_flag_enabled("QUATVAR_LOG_CASE_DATA")
"""By default a failing check only logs its first failing case. Set this flag to log every
failing case with its full data.
"""

DONT_TRACE = _debug_flag_enabled("QUATVAR_DONT_TRACE")
"""Disable the span processors (no timing lines in the log)."""
