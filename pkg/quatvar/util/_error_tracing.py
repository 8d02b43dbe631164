from ..logger import logger
from ..tracing import SpanError, get_current_span


def attach_error_to_current_span(error: SpanError) -> None:
    """Mark the open check span as failed; outside a check only a debug line is logged."""
    span = get_current_span()
    if span is None:
        logger.debug("no open check span for error %s", error["message"])
        return
    span.set_error(error)
