"""Logging setup for morse-graph-kit.

Library modules log through ``structlog.get_logger(__name__)``; the command line
calls :func:`configure_logging` once. Records go to stderr because stdout carries
command output (JSON lines and reports).
"""

from __future__ import annotations

import logging
import sys
from typing import Literal

import sentry_sdk
import structlog
from sentry_sdk.integrations.logging import LoggingIntegration
from structlog.stdlib import BoundLogger

from ._processors import (
    add_sentry_trace_id,
    nest_custom_fields,
    remove_processors_meta_safe,
    rename_and_flatten_fields,
    stringify_exact_values,
)

RendererChoice = Literal["json", "console", "auto"]
_VALID_RENDERERS = frozenset({"json", "console", "auto"})

SERVICE_NAME = "morse-graph-kit"

_is_configured = False


def configure_logging(
    service_name: str = SERVICE_NAME,
    log_level: int = logging.WARNING,
    sentry_dsn: str | None = None,
    sentry_environment: str | None = None,
    traces_sample_rate: float = 0.0,
    renderer: RendererChoice = "auto",
) -> BoundLogger:
    """
    Configure structlog and stdlib logging, with optional Sentry error reporting.

    Args:
        service_name: Logger name of the returned logger and the Sentry service tag.
        log_level: Minimum level written to stderr.
        sentry_dsn: Optional Sentry DSN. Without it nothing leaves the process.
        sentry_environment: Optional Sentry environment name.
        traces_sample_rate: Sentry performance sampling rate, 0.0 disables tracing.
        renderer: "json", "console", or "auto" (console when stderr is a TTY).

    Returns:
        A structlog bound logger.

    Example:
        >>> log = configure_logging(log_level=logging.INFO, renderer="json")
        >>> log.info("propagator solved", nonzero=4)
        {"timestamp": "...", "log_level": "INFO", "logger": "morse-graph-kit",
         "message": "propagator solved", "details": {"nonzero": 4}}
    """
    if renderer not in _VALID_RENDERERS:
        raise ValueError(
            f"renderer must be one of {sorted(_VALID_RENDERERS)}, got {renderer!r}"
        )

    global _is_configured

    if not _is_configured:
        if sentry_dsn:
            sentry_sdk.init(
                dsn=sentry_dsn,
                environment=sentry_environment,
                traces_sample_rate=traces_sample_rate,
                integrations=[
                    LoggingIntegration(
                        level=logging.INFO,
                        event_level=logging.ERROR,
                    ),
                ],
            )

        resolved_renderer: Literal["json", "console"] = (
            ("console" if sys.stderr.isatty() else "json")
            if renderer == "auto"
            else renderer
        )

        shared_processors: list = [
            structlog.contextvars.merge_contextvars,
            structlog.stdlib.add_log_level,
            structlog.stdlib.add_logger_name,
            structlog.processors.TimeStamper(fmt="iso", utc=True),
            structlog.processors.StackInfoRenderer(),
        ]
        # ConsoleRenderer formats raw exc_info itself.
        if resolved_renderer == "json":
            shared_processors.append(structlog.processors.format_exc_info)
        shared_processors.extend(
            [rename_and_flatten_fields, stringify_exact_values, nest_custom_fields]
        )

        if sentry_dsn:
            shared_processors.append(add_sentry_trace_id)

        if resolved_renderer == "console":
            final_renderer = structlog.dev.ConsoleRenderer(colors=True)
        else:
            final_renderer = structlog.processors.JSONRenderer(
                ensure_ascii=False, sort_keys=True
            )

        structlog.configure(
            processors=shared_processors
            + [structlog.stdlib.ProcessorFormatter.wrap_for_formatter],
            logger_factory=structlog.stdlib.LoggerFactory(),
            wrapper_class=structlog.stdlib.BoundLogger,
            cache_logger_on_first_use=True,
        )

        formatter = structlog.stdlib.ProcessorFormatter(
            foreign_pre_chain=shared_processors,
            processors=[remove_processors_meta_safe, final_renderer],
        )

        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(formatter)

        root_logger = logging.getLogger()
        root_logger.handlers.clear()
        root_logger.addHandler(handler)
        root_logger.setLevel(log_level)

        _is_configured = True

    if sentry_dsn:
        sentry_sdk.set_tag("service", service_name)

    return structlog.get_logger(service_name)


def get_logger(name: str = SERVICE_NAME) -> BoundLogger:
    """Return a logger, configuring defaults on first use."""
    if not _is_configured:
        configure_logging()
    return structlog.get_logger(name)


def reset_configuration() -> None:
    """
    Reset the logging configuration. Meant for tests.
    """
    global _is_configured
    _is_configured = False
    structlog.reset_defaults()
