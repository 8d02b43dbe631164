from __future__ import annotations

import contextvars
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from .spans import Span

_active_check: contextvars.ContextVar[Span | None] = contextvars.ContextVar("quatvar_active_check", default=None)


class Scope:
    """The innermost open check span of the current context; nested checks hang below it."""

    @classmethod
    def get_current_span(cls) -> Span | None:
        return _active_check.get()

    @classmethod
    def set_current_span(cls, span: Span | None) -> contextvars.Token[Span | None]:
        return _active_check.set(span)

    @classmethod
    def reset_current_span(cls, token: contextvars.Token[Span | None]) -> None:
        _active_check.reset(token)
