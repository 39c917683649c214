"""configure_logging() behavior: Sentry wiring, idempotence and renderers."""

from __future__ import annotations

import json
import logging
import sys
from unittest.mock import patch

import pytest
import structlog

from morse_graph_kit import configure_logging, get_logger

DSN = "https://k@o.ingest.sentry.io/1"


def _emit_and_capture(capsys, logger_name: str = "morse_graph_kit.chain", message: str = "hello"):
    """Emit one record via stdlib logging and capture stderr."""
    capsys.readouterr()
    logging.getLogger(logger_name).info(message)
    return capsys.readouterr().err


def test_configure_logging_is_idempotent(mock_sentry_sdk):
    """A second call must not re-configure structlog or re-init Sentry."""
    configure_logging(sentry_dsn=DSN)
    first_processors = structlog.get_config()["processors"]
    configure_logging(sentry_dsn=DSN)

    assert structlog.is_configured()
    assert len(structlog.get_config()["processors"]) == len(first_processors)
    assert mock_sentry_sdk["init"].call_count == 1


def test_no_dsn_does_not_init_sentry(mock_sentry_sdk):
    configure_logging(sentry_dsn=None)
    assert mock_sentry_sdk["init"].call_count == 0
    assert mock_sentry_sdk["set_tag"].call_count == 0


def test_empty_dsn_does_not_init_sentry(mock_sentry_sdk):
    """Empty string DSN is falsy and treated like None."""
    configure_logging(sentry_dsn="")
    assert mock_sentry_sdk["init"].call_count == 0


def test_dsn_inits_sentry_with_logging_integration(mock_sentry_sdk):
    configure_logging(sentry_dsn=DSN, sentry_environment="ci", traces_sample_rate=0.25)
    kwargs = mock_sentry_sdk["init"].call_args.kwargs
    assert kwargs["dsn"] == DSN
    assert kwargs["environment"] == "ci"
    assert kwargs["traces_sample_rate"] == 0.25
    integration = mock_sentry_sdk["LoggingIntegration"].call_args.kwargs
    assert integration == {"level": logging.INFO, "event_level": logging.ERROR}


def test_service_name_attached_as_tag(mock_sentry_sdk):
    configure_logging("mgk-batch", sentry_dsn=DSN)
    mock_sentry_sdk["set_tag"].assert_called_with("service", "mgk-batch")


def test_sentry_trace_processor_only_with_dsn(mock_sentry_sdk):
    from morse_graph_kit._processors import add_sentry_trace_id

    configure_logging(renderer="json")
    assert add_sentry_trace_id not in structlog.get_config()["processors"]


def test_invalid_renderer_raises_value_error():
    """Bad renderer string fails fast before any side effects."""
    with pytest.raises(ValueError, match="renderer must be one of"):
        configure_logging(renderer="yaml")  # type: ignore[arg-type]
    assert not structlog.is_configured()


def test_json_renderer_writes_parseable_json_to_stderr(capsys):
    configure_logging(log_level=logging.INFO, renderer="json")
    captured = _emit_and_capture(capsys)
    payload = json.loads(captured.strip().splitlines()[-1])
    assert payload["message"] == "hello"
    assert payload["log_level"] == "INFO"
    assert payload["logger"] == "morse_graph_kit.chain"


def test_stdout_stays_clean(capsys):
    configure_logging(log_level=logging.DEBUG, renderer="json")
    capsys.readouterr()
    structlog.get_logger("morse_graph_kit.theta").warning("grid mismatch", total=3)
    captured = capsys.readouterr()
    assert captured.out == ""
    payload = json.loads(captured.err.strip().splitlines()[-1])
    assert payload["details"] == {"total": 3}


def test_level_filters_records(capsys):
    configure_logging(renderer="json")
    assert _emit_and_capture(capsys) == ""


def test_exact_values_are_rendered_as_strings(capsys):
    from fractions import Fraction

    configure_logging(log_level=logging.INFO, renderer="json")
    capsys.readouterr()
    structlog.get_logger("morse_graph_kit.invariant").info("class computed", coeff=Fraction(-3, 4))
    payload = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert payload["details"]["coeff"] == "-3/4"


def test_console_renderer_is_not_json(capsys):
    configure_logging(log_level=logging.INFO, renderer="console")
    captured = _emit_and_capture(capsys)
    assert "hello" in captured
    with pytest.raises(json.JSONDecodeError):
        json.loads(captured.strip().splitlines()[-1])


def test_auto_renderer_resolves_to_json_when_piped(capsys):
    with patch.object(sys.stderr, "isatty", return_value=False, create=True):
        configure_logging(log_level=logging.INFO, renderer="auto")
    payload = json.loads(_emit_and_capture(capsys).strip().splitlines()[-1])
    assert payload["message"] == "hello"


def test_console_renderer_drops_format_exc_info_from_chain():
    """ConsoleRenderer handles raw exc_info itself."""
    configure_logging(renderer="console")
    assert structlog.processors.format_exc_info not in structlog.get_config()["processors"]


def test_json_renderer_includes_format_exc_info_in_chain():
    configure_logging(renderer="json")
    assert structlog.processors.format_exc_info in structlog.get_config()["processors"]


def test_get_logger_configures_defaults(mock_sentry_sdk):
    get_logger()
    assert structlog.is_configured()
    assert mock_sentry_sdk["init"].call_count == 0
