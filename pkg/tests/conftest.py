"""Shared fixtures.

Resets structlog and the package's module-level _is_configured flag between
tests, patches the Sentry SDK so tests stay offline, and provides seeded random
generators, standard complexes and a perfect Morse triple on S³.
"""

from __future__ import annotations

import logging
import random
from unittest.mock import MagicMock, patch

import pytest
import structlog

import morse_graph_kit.logs as logs_module
from morse_graph_kit.chain import BasedChainComplex, direct_sum_with_elementary
from morse_graph_kit.config import FunctionSpec, Settings, SolverConfig, SystemConfig
from morse_graph_kit.graph import ColorScheme
from morse_graph_kit.morse import MorseSystem


@pytest.fixture(autouse=True)
def reset_logger_config():
    """Reset structlog + the package's configure-once flag between tests."""
    yield
    structlog.reset_defaults()
    logs_module._is_configured = False
    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)


@pytest.fixture
def mock_sentry_sdk():
    """Patch sentry_sdk + LoggingIntegration at the import site (logs module)."""
    with patch.object(logs_module, "sentry_sdk") as mock_sdk, patch.object(
        logs_module, "LoggingIntegration"
    ) as mock_logging_integration:
        mock_sdk.init = MagicMock()
        mock_sdk.set_tag = MagicMock()
        mock_logging_integration.return_value = MagicMock(
            name="LoggingIntegrationInstance"
        )
        yield {
            "sdk": mock_sdk,
            "init": mock_sdk.init,
            "set_tag": mock_sdk.set_tag,
            "LoggingIntegration": mock_logging_integration,
        }


@pytest.fixture
def rng():
    return random.Random(7)


@pytest.fixture
def elementary():
    """``p → q`` with ``p`` in degree 1."""
    return BasedChainComplex.elementary(0, ("p", "q"), max_degree=3)


@pytest.fixture
def elementary_scheme():
    """Three elementary complexes in degrees 0, 1 and 2."""
    return ColorScheme(
        tuple(
            BasedChainComplex.elementary(k, ("p", "q"), max_degree=3) for k in range(3)
        )
    )


@pytest.fixture
def fast_settings():
    """Coarse seed grids for the geometric tests."""
    return Settings(solver=SolverConfig(grid_density=2, time_seeds=(0.5, 2.0)))


@pytest.fixture
def perfect_triple(fast_settings):
    """Three rotated height functions on S³ with generic tilts."""
    specs = (
        FunctionSpec("f1", ambient="X4 + 0.3*X1"),
        FunctionSpec("f2", ambient="X4 + 0.3*X2 - 0.1*X1"),
        FunctionSpec("f3", ambient="X4 + 0.3*X3 + 0.2*X2"),
    )
    return MorseSystem.from_config(SystemConfig(functions=specs, settings=fast_settings))


@pytest.fixture
def two_pair(elementary):
    """``p → q`` in degrees 1, 0 plus ``p+ → q+`` in degrees 2, 1.

    Unlike the elementary complex it has degree-2 maps, so propagators are not
    unique and separated edges of degree 2 exist.
    """
    return direct_sum_with_elementary(elementary, 1, ("p+", "q+"))
