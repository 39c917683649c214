"""Bifurcation scans between Morse systems."""

from __future__ import annotations

import pytest

from morse_graph_kit.chamber import (
    ChamberEvent,
    ScanReport,
    chamber_invariance,
    scan_interpolation,
)
from morse_graph_kit.config import FunctionSpec, Settings, SystemConfig
from morse_graph_kit.errors import Unresolved
from morse_graph_kit.morse import MorseFunction, MorseSystem


def _system(*expressions, settings=None):
    specs = tuple(FunctionSpec(f"f{i}", ambient=e) for i, e in enumerate(expressions, 1))
    return MorseSystem.from_config(SystemConfig(functions=specs, settings=settings or Settings()))


def test_scan_report_is_clean_without_events():
    report = ScanReport(steps=4)
    assert report.clean
    report.events.append(ChamberEvent("count", 0.5, "f1", {"tracked": 2, "found": 4}))
    data = report.to_json()
    assert not data["clean"]
    assert data["events"] == [
        {"kind": "count", "s": 0.5, "function": "f1", "detail": {"tracked": 2, "found": 4}}
    ]


def test_scan_needs_matching_systems(perfect_triple):
    single = MorseSystem([MorseFunction.from_ambient("h", "X4")])
    with pytest.raises(ValueError, match="different numbers"):
        scan_interpolation(single, perfect_triple)


@pytest.mark.parametrize("step", [0.0, -0.1, 1.5])
def test_scan_step_must_be_in_range(perfect_triple, step):
    with pytest.raises(ValueError, match="step"):
        scan_interpolation(perfect_triple, perfect_triple, step)


@pytest.mark.slow
def test_constant_family_has_no_bifurcations(perfect_triple):
    report = scan_interpolation(
        perfect_triple, perfect_triple, 0.25, recount_every=2, samples=16
    )
    assert report.steps == 4
    assert report.clean, report.events
    assert report.min_alignment > 0
    assert set(report.min_hessian_det) == {"f1~f1", "f2~f2", "f3~f3"}


@pytest.mark.slow
def test_nearby_triples_share_the_z_class():
    start = _system("X4 + 0.3*X1", "X4 + 0.3*X2 - 0.1*X1", "X4 + 0.3*X3 + 0.2*X2")
    end = _system("X4 + 0.32*X1", "X4 + 0.3*X2 - 0.12*X1", "X4 + 0.29*X3 + 0.2*X2")
    report, detail = chamber_invariance(start, end, 0.25)
    assert report.passed, report.counterexamples
    assert detail["scan"]["clean"]
    assert detail["start"]["theta"]["total"] == detail["end"]["theta"]["total"]


@pytest.mark.slow
def test_family_through_a_degenerate_function_is_unresolved(fast_settings):
    start = _system(
        "X4 + 0.3*X1", "X4 + 0.3*X2 - 0.1*X1", "X4 + 0.3*X3 + 0.2*X2", settings=fast_settings
    )
    # f3 vanishes identically at s = 1/2
    end = _system(
        "X4 + 0.3*X1", "X4 + 0.3*X2 - 0.1*X1", "-X4 - 0.3*X3 - 0.2*X2", settings=fast_settings
    )
    with pytest.raises(Unresolved, match="bifurcation"):
        chamber_invariance(start, end, 0.25)
