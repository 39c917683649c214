"""Structlog processors shaping morse-graph-kit log records into a flat schema."""

from __future__ import annotations

from fractions import Fraction
from typing import Any

import numpy as np
import sentry_sdk
import sympy
from structlog.types import EventDict, WrappedLogger

STANDARD_FIELDS = {
    "timestamp",
    "log_level",
    "message",
    "trace_id",
    "span_id",
    "logger",
    # Left top-level for ConsoleRenderer; consumed earlier in JSON mode.
    "exc_info",
    "stack_info",
}


def remove_processors_meta_safe(
    logger: WrappedLogger, method_name: str, event_dict: EventDict
) -> EventDict:
    """
    Remove structlog's internal metadata fields (_record, _from_structlog).
    Unlike the built-in remove_processors_meta, missing fields are not an error.
    """
    event_dict.pop("_record", None)
    event_dict.pop("_from_structlog", None)
    return event_dict


def rename_and_flatten_fields(
    logger: WrappedLogger, method_name: str, event_dict: EventDict
) -> EventDict:
    """
    Rename 'event' to 'message' and 'level' to 'log_level'.

    Args:
        logger: The wrapped logger instance
        method_name: The name of the method called (e.g., 'info', 'error')
        event_dict: The current state of the log entry

    Returns:
        The modified event dictionary
    """
    if "event" in event_dict:
        event_dict["message"] = event_dict.pop("event")

    if "level" in event_dict:
        event_dict["log_level"] = event_dict.pop("level").upper()

    return event_dict


def _plain(value: Any) -> Any:
    if isinstance(value, bool):
        return value
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, sympy.Rational):
        return f"{value.p}/{value.q}"
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def stringify_exact_values(
    logger: WrappedLogger, method_name: str, event_dict: EventDict
) -> EventDict:
    """
    Render exact rationals as "p/q" strings and numpy values as Python values.

    Args:
        logger: The wrapped logger instance
        method_name: The name of the method called (e.g., 'info', 'error')
        event_dict: The current state of the log entry

    Returns:
        The modified event dictionary, safe for JSONRenderer
    """
    for key, value in list(event_dict.items()):
        if key.startswith("_") or key in STANDARD_FIELDS:
            continue
        event_dict[key] = _plain(value)
    return event_dict


def add_sentry_trace_id(
    logger: WrappedLogger, method_name: str, event_dict: EventDict
) -> EventDict:
    """
    Add the Sentry trace_id/span_id so log lines correlate with Sentry events.

    Args:
        logger: The wrapped logger instance
        method_name: The name of the method called (e.g., 'info', 'error')
        event_dict: The current state of the log entry

    Returns:
        The modified event dictionary with trace_id added when available
    """
    try:
        scope = sentry_sdk.get_current_scope()
        traceparent = scope.get_traceparent() if scope else None
        if traceparent:
            # "trace_id-span_id[-sampled]"
            trace_id, span_id = traceparent.split("-")[:2]
            event_dict["trace_id"] = trace_id
            event_dict["span_id"] = span_id
    except Exception:
        pass

    return event_dict


def nest_custom_fields(
    logger: WrappedLogger, method_name: str, event_dict: EventDict
) -> EventDict:
    """
    Nest all non-standard fields into a 'details' object.

    Args:
        logger: The wrapped logger instance
        method_name: The name of the method called (e.g., 'info', 'error')
        event_dict: The current state of the log entry

    Returns:
        The modified event dictionary with custom fields nested under 'details'
    """
    details: dict[str, Any] = {}

    for key in list(event_dict.keys()):
        if key.startswith("_"):
            event_dict.pop(key)
        elif key not in STANDARD_FIELDS:
            details[key] = event_dict.pop(key)

    if details:
        event_dict["details"] = details

    return event_dict
