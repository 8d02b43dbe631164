from __future__ import annotations

from pydantic import TypeAdapter, ValidationError
from typing_extensions import TypeVar

from ..exceptions import UserError
from ..tracing import SpanError
from ._error_tracing import attach_error_to_current_span

T = TypeVar("T")


def validate_json(json_str: str | bytes, type_adapter: TypeAdapter[T]) -> T:
    """Parse a stored report (or any JSON payload) against ``type_adapter``."""
    try:
        return type_adapter.validate_json(json_str)
    except ValidationError as e:
        attach_error_to_current_span(
            SpanError(message="Stored JSON does not match its schema", data={"errors": e.error_count()})
        )
        raise UserError(f"Invalid JSON for {type_adapter}: {e}") from e
