"""Sentry capture through an in-memory transport.

Swaps Sentry's HTTP transport for a recording one and runs the full
configure_logging() pipeline (structlog, stdlib, LoggingIntegration), so a
failed check logged at ERROR is shown to produce a real event envelope without
network access.
"""

from __future__ import annotations

import logging

import pytest
import sentry_sdk
import structlog
from sentry_sdk.transport import Transport

import morse_graph_kit.logs as logs_module
from morse_graph_kit import configure_logging

DSN = "https://public@o0.ingest.sentry.io/0"


class _CaptureTransport(Transport):
    """Records envelopes on the class so tests can read them after init."""

    captured: list = []

    def __init__(self, options=None):
        super().__init__(options)

    def capture_envelope(self, envelope):
        _CaptureTransport.captured.append(envelope)

    def flush(self, timeout, callback=None):
        return None

    def kill(self):
        return None


@pytest.fixture
def capture_transport(monkeypatch):
    real_init = sentry_sdk.init

    def init_with_capture(*args, **kwargs):
        kwargs["transport"] = _CaptureTransport
        return real_init(*args, **kwargs)

    monkeypatch.setattr(logs_module.sentry_sdk, "init", init_with_capture)
    _CaptureTransport.captured = []
    yield _CaptureTransport
    sentry_sdk.flush(timeout=2.0)


def _event_items(envelopes, needle: str):
    """Payloads of items with header type 'event' that mention ``needle``."""
    matches = []
    for envelope in envelopes:
        for item in envelope.items:
            if item.headers.get("type") != "event" or item.payload is None:
                continue
            try:
                data = item.payload.json
            except Exception:
                continue
            if data and needle in str(data):
                matches.append(data)
    return matches


def test_error_log_produces_event(capture_transport):
    configure_logging("mgk-capture", sentry_dsn=DSN, renderer="json")
    structlog.get_logger("morse_graph_kit.invariant").error(
        "sign covariance failed", failures=2
    )
    sentry_sdk.flush(timeout=2.0)

    events = _event_items(capture_transport.captured, "sign covariance failed")
    assert events, "ERROR records must reach Sentry as events"
    tags = events[0].get("tags") or {}
    if isinstance(tags, dict):
        assert tags.get("service") == "mgk-capture"
    else:
        assert ["service", "mgk-capture"] in tags or ("service", "mgk-capture") in tags


def test_warning_log_produces_no_event(capture_transport):
    configure_logging(log_level=logging.INFO, sentry_dsn=DSN, renderer="json")
    structlog.get_logger("morse_graph_kit.theta").warning("grid totals disagree")
    sentry_sdk.flush(timeout=2.0)

    assert _event_items(capture_transport.captured, "grid totals disagree") == []
