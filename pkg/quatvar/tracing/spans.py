from __future__ import annotations

import contextvars
import time
from typing import Any

from typing_extensions import TypedDict

from .logger import logger
from .processor_interface import TracingProcessor
from .scope import Scope


class SpanError(TypedDict):
    message: str
    data: dict[str, Any] | None


class Span:
    """A timed region of work, usually one verification check or one expensive build step.

    Spans exist for the log only: their timings never reach a report.
    """

    __slots__ = (
        "_name",
        "_params",
        "_parent",
        "_started_at",
        "_ended_at",
        "_error",
        "_prev_span_token",
        "_processors",
    )

    def __init__(
        self,
        name: str,
        params: dict[str, Any],
        processors: list[TracingProcessor],
        parent: Span | None = None,
    ):
        self._name = name
        self._params = params
        self._parent = parent
        self._processors = processors
        self._started_at: float | None = None
        self._ended_at: float | None = None
        self._error: SpanError | None = None
        self._prev_span_token: contextvars.Token[Span | None] | None = None

    @property
    def name(self) -> str:
        return self._name

    @property
    def params(self) -> dict[str, Any]:
        return self._params

    @property
    def parent(self) -> Span | None:
        return self._parent

    @property
    def depth(self) -> int:
        return 0 if self._parent is None else self._parent.depth + 1

    def start(self, mark_as_current: bool = False) -> None:
        if self._started_at is not None:
            logger.warning("Span already started")
            return

        self._started_at = time.perf_counter()
        for processor in self._processors:
            processor.on_span_start(self)
        if mark_as_current:
            self._prev_span_token = Scope.set_current_span(self)

    def finish(self, reset_current: bool = False) -> None:
        if self._ended_at is not None:
            logger.warning("Span already finished")
            return

        self._ended_at = time.perf_counter()
        for processor in self._processors:
            processor.on_span_end(self)
        if reset_current and self._prev_span_token is not None:
            Scope.reset_current_span(self._prev_span_token)
            self._prev_span_token = None

    def __enter__(self) -> Span:
        self.start(mark_as_current=True)
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        if exc_val is not None and self._error is None:
            self.set_error(SpanError(message=str(exc_val), data={"type": exc_type.__name__}))
        reset_current = True
        if exc_type is GeneratorExit:
            logger.debug("GeneratorExit, skipping span reset")
            reset_current = False

        self.finish(reset_current=reset_current)

    def set_error(self, error: SpanError) -> None:
        self._error = error

    @property
    def error(self) -> SpanError | None:
        return self._error

    @property
    def elapsed(self) -> float | None:
        """Wall-clock seconds between start and finish, ``None`` while running."""
        if self._started_at is None or self._ended_at is None:
            return None
        return self._ended_at - self._started_at
