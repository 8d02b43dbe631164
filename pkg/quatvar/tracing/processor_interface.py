from __future__ import annotations

import abc
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from .spans import Span


class TracingProcessor(abc.ABC):
    """Receives every check span as it opens and closes.

    ``on_span_end`` runs inside the check's ``finally`` and must not raise.
    """

    @abc.abstractmethod
    def on_span_start(self, span: Span) -> None: ...

    @abc.abstractmethod
    def on_span_end(self, span: Span) -> None: ...

    def shutdown(self) -> None:
        """Release whatever the processor holds; called when it is replaced."""
