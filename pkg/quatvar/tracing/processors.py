from __future__ import annotations

from .logger import logger
from .processor_interface import TracingProcessor
from .spans import Span


class LoggingProcessor(TracingProcessor):
    """Logs span boundaries and durations to the ``quatvar.checks`` logger."""

    def on_span_start(self, span: Span) -> None:
        logger.debug("%s> %s %s", "  " * span.depth, span.name, span.params)

    def on_span_end(self, span: Span) -> None:
        indent = "  " * span.depth
        if span.error is not None:
            logger.warning("%s< %s failed: %s", indent, span.name, span.error["message"])
        else:
            logger.debug("%s< %s (%.3fs)", indent, span.name, span.elapsed or 0.0)

    def shutdown(self) -> None:
        pass


class CollectingProcessor(TracingProcessor):
    """Keeps finished spans in memory. Useful in tests."""

    def __init__(self) -> None:
        self.finished: list[Span] = []

    def on_span_start(self, span: Span) -> None:
        pass

    def on_span_end(self, span: Span) -> None:
        self.finished.append(span)

    def shutdown(self) -> None:
        self.finished.clear()
