"""Θ flow counting and the Z_{2,3} pipeline on perfect functions."""

from __future__ import annotations

from dataclasses import fields, replace

import pytest

from morse_graph_kit.config import FunctionSpec, Settings, SystemConfig, Tolerances
from morse_graph_kit.errors import NonGeneric
from morse_graph_kit.graph import enumerate_labelings, theta_graph
from morse_graph_kit.invariant import z23_pipeline
from morse_graph_kit.morse import MorseSystem
from morse_graph_kit.theta import check_nonparallel, count_theta_flows, labeled_count


def _system(*expressions, settings=None):
    specs = tuple(FunctionSpec(f"f{i}", ambient=e) for i, e in enumerate(expressions, 1))
    return MorseSystem.from_config(SystemConfig(functions=specs, settings=settings or Settings()))


@pytest.fixture(scope="module")
def counted():
    system = _system("X4 + 0.3*X1", "X4 + 0.3*X2 - 0.1*X1", "X4 + 0.3*X3 + 0.2*X2")
    return system, count_theta_flows(system)


def test_shifted_function_is_not_generic():
    system = _system("X4 + 0.3*X1", "X4 + 0.3*X1 + 2", "X4 + 0.3*X3")
    with pytest.raises(NonGeneric, match="parallel"):
        check_nonparallel(system)
    with pytest.raises(NonGeneric):
        count_theta_flows(system)


def test_theta_needs_three_functions():
    system = _system("X4 + 0.3*X1", "X4 + 0.3*X2")
    with pytest.raises(ValueError, match="three functions"):
        count_theta_flows(system)


@pytest.mark.slow
def test_seed_grids_agree(counted):
    system, theta = counted
    assert set(theta.grid_totals) == set(system.settings.solver.seeds)
    assert set(theta.grid_totals.values()) == {theta.total}
    assert theta.total == sum(s.sign for s in theta.solutions)
    for solution in theta.solutions:
        assert solution.residual <= system.settings.tolerances.sol
        assert min(solution.times) > 0
        assert solution.sign in (-1, 1)


@pytest.mark.slow
def test_count_is_stable_under_halved_tolerances(counted):
    system, theta = counted
    base = system.settings
    halved = replace(
        base,
        tolerances=Tolerances(
            **{f.name: getattr(base.tolerances, f.name) / 2 for f in fields(Tolerances)}
        ),
        integrator=replace(
            base.integrator, rtol=base.integrator.rtol / 2, atol=base.integrator.atol / 2
        ),
    )
    rerun = count_theta_flows(system, halved)
    assert rerun.total == theta.total
    assert len(rerun.solutions) == len(theta.solutions)
    radius = base.tolerances.dedup
    for solution in theta.solutions:
        assert any(
            solution.x.distance(other.x) < radius and solution.y.distance(other.y) < radius
            for other in rerun.solutions
        )


@pytest.mark.slow
def test_labeled_counts_follow_the_orientation_sign(counted):
    _, theta = counted
    for labeling, _ in enumerate_labelings(theta_graph())[::7]:
        assert labeled_count(theta.solutions, labeling) == labeling.sign * theta.total


@pytest.mark.slow
def test_principal_term_is_eight_times_the_count(counted):
    system, theta = counted
    z, report = z23_pipeline(system)
    assert z.space.name == "A(2,3)"
    assert z.coords == [8 * theta.total]
    assert report["covariance"]["passed"]
    assert len(report["per_labeling"]) == 96
    assert report["theta"]["total"] == theta.total
