from __future__ import annotations

from typing import Any

from .._debug import DONT_TRACE
from .processor_interface import TracingProcessor
from .processors import CollectingProcessor, LoggingProcessor
from .scope import Scope
from .spans import Span, SpanError

__all__ = [
    "CollectingProcessor",
    "LoggingProcessor",
    "Span",
    "SpanError",
    "TracingProcessor",
    "add_trace_processor",
    "check_span",
    "get_current_span",
    "set_trace_processors",
]

_processors: list[TracingProcessor] = [] if DONT_TRACE else [LoggingProcessor()]


def add_trace_processor(span_processor: TracingProcessor) -> None:
    """
    Adds a new trace processor. This processor will receive all spans.
    """
    _processors.append(span_processor)


def set_trace_processors(processors: list[TracingProcessor]) -> None:
    """
    Set the list of trace processors. This will replace the current list of processors.
    """
    for processor in _processors:
        processor.shutdown()
    _processors[:] = list(processors)


def get_current_span() -> Span | None:
    return Scope.get_current_span()


def check_span(name: str, **params: Any) -> Span:
    """Create a span for a check or build step. Use it as a context manager:

    ```python
    with check_span("verify.fix_prop", N=3):
        ...
    ```
    """
    return Span(name, params, _processors, parent=Scope.get_current_span())
