"""Charts, flows, critical points and Morse complexes on S³."""

from __future__ import annotations

import math

import numpy as np
import pytest

from morse_graph_kit.config import FunctionSpec
from morse_graph_kit.errors import ConfigError, NonGeneric
from morse_graph_kit.morse import (
    MorseFunction,
    MorseSystem,
    Point,
    flow,
    flow_with_jacobian,
    morse_complex,
)


@pytest.fixture
def height():
    """``X4``: in either chart the round-metric flow is ``ẋ = ∓x``."""
    return MorseSystem([MorseFunction.from_ambient("h", "X4")])


def test_chart_change_is_an_involution():
    p = Point.from_ambient([0.3, -0.2, 0.5, 0.4])
    q = p.in_chart(1 - p.chart)
    assert q.chart != p.chart
    back = q.in_chart(p.chart)
    np.testing.assert_allclose(back.array, p.array, atol=1e-14)
    assert p.distance(q) < 1e-12


def test_ambient_coordinates_are_normalized():
    p = Point.from_ambient([1.0, 2.0, 2.0, -4.0])
    np.testing.assert_allclose(p.ambient(), np.array([1.0, 2.0, 2.0, -4.0]) / 5.0, atol=1e-14)
    assert p.chart == 0
    assert p.normalized().array @ p.normalized().array <= 1.0


def test_point_json_carries_ambient_coordinates():
    data = Point(0, (0.0, 0.0, 0.0)).to_json()
    assert data["chart"] == 0
    assert data["ambient"] == [0.0, 0.0, 0.0, -1.0]


def test_flow_contracts_to_the_minimum(height):
    start = Point(0, (0.5, 0.2, -0.1))
    end = flow(height, 0, start, 1.0)
    assert end.chart == 0
    np.testing.assert_allclose(end.array, start.array * math.exp(-1.0), atol=1e-8)
    assert np.linalg.norm(flow(height, 0, start, 50.0).array) < 1e-8


def test_flow_leaves_the_maximum(height):
    end = flow(height, 0, Point(1, (0.1, 0.0, 0.0)), 1.0)
    assert end.chart == 1
    assert end.array[0] == pytest.approx(0.1 * math.e, rel=1e-8)


def test_zero_time_is_the_identity(height):
    start = Point(0, (0.2, 0.2, 0.2))
    assert flow(height, 0, start, 0.0) is start
    with pytest.raises(ValueError, match="non-negative"):
        flow(height, 0, start, -1.0)


def test_flow_derivative_matches_closed_form(height):
    end, jac = flow_with_jacobian(height, 0, Point(0, (0.3, -0.4, 0.1)), 2.0)
    np.testing.assert_allclose(jac, np.eye(3) * math.exp(-2.0), atol=1e-8)
    np.testing.assert_allclose(end.array, np.array([0.3, -0.4, 0.1]) * math.exp(-2.0), atol=1e-8)


def test_flow_derivative_matches_finite_differences(perfect_triple):
    x = np.array([0.2, -0.1, 0.3])
    _, jac = flow_with_jacobian(perfect_triple, 1, Point(0, tuple(x)), 0.7)
    h = 1e-5
    columns = []
    for k in range(3):
        step = np.zeros(3)
        step[k] = h
        plus = flow(perfect_triple, 1, Point(0, tuple(x + step)), 0.7)
        minus = flow(perfect_triple, 1, Point(0, tuple(x - step)), 0.7)
        columns.append((plus.array - minus.array) / (2 * h))
    np.testing.assert_allclose(jac, np.array(columns).T, atol=1e-5)


def test_tilted_height_is_perfect(perfect_triple):
    points = perfect_triple.critical_points(0)
    assert [cp.index for cp in points] == [0, 3]
    assert points[0].value < points[1].value
    report = perfect_triple.validate()
    assert all(entry["perfect"] for entry in report.values())


def test_declared_points_must_be_critical():
    fn = MorseFunction.from_ambient("h", "X4", declared=[(1.0, 0.0, 0.0, 0.0)])
    with pytest.raises(NonGeneric, match="grad"):
        MorseSystem([fn]).validate()


@pytest.mark.parametrize(
    ("text", "match"),
    [("X4 + Y", "unknown symbols"), ("X4 +* 2", "cannot parse")],
)
def test_bad_expressions_are_config_errors(text, match):
    with pytest.raises(ConfigError, match=match) as excinfo:
        MorseFunction.from_ambient("f", text)
    assert excinfo.value.key == "functions.f.ambient"


def test_chart_expression_extends_through_the_involution():
    fn = MorseFunction.from_spec(FunctionSpec("g", chart0="x1"))
    point = Point(1, (0.5, 0.0, 0.0))
    assert fn.value(point) == pytest.approx(fn.value(point.in_chart(0)))


def test_interpolation_needs_matching_systems(height, perfect_triple):
    with pytest.raises(ValueError, match="different numbers"):
        height.interpolate(perfect_triple, 0.5)


@pytest.mark.slow
def test_quadric_has_the_homology_of_the_sphere(fast_settings):
    fn = MorseFunction.from_ambient("q", "X1**2 + 2*X2**2 + 3*X3**2 + 4*X4**2")
    system = MorseSystem([fn], settings=fast_settings)
    points = system.critical_points(0)
    assert len(points) == 8
    assert sorted(cp.index for cp in points) == [0, 0, 1, 1, 2, 2, 3, 3]
    complex = morse_complex(system, 0)
    assert complex.homology_dimensions() == {0: 1, 1: 0, 2: 0, 3: 1}


@pytest.mark.slow
def test_perfect_function_has_zero_boundary(perfect_triple):
    complex = morse_complex(perfect_triple, 0)
    assert [len(names) for names in complex.basis] == [1, 0, 0, 1]
    assert complex.homology_dimensions() == {0: 1, 1: 0, 2: 0, 3: 1}
