from __future__ import annotations

import os

from dotenv import load_dotenv

from .exceptions import UserError

_dotenv_loaded = False


def _ensure_dotenv() -> None:
    global _dotenv_loaded
    if not _dotenv_loaded:
        load_dotenv()
        _dotenv_loaded = True


def default_threads() -> int:
    """Worker count for data-parallel sweeps, from ``QUATVAR_THREADS`` (default: CPU count)."""
    _ensure_dotenv()
    raw = os.getenv("QUATVAR_THREADS")
    if raw is None or raw.strip() == "":
        return os.cpu_count() or 1
    try:
        threads = int(raw)
    except ValueError as e:
        raise UserError(f"QUATVAR_THREADS must be a positive integer, got {raw!r}") from e
    if threads < 1:
        raise UserError(f"QUATVAR_THREADS must be a positive integer, got {raw!r}")
    return threads
