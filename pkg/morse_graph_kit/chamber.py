"""Bifurcation scan along ``f_s = (1 − s)·f^A + s·f^B``.

Gradients and Hessians are linear in ``s``, so the scan evaluates the two end
systems and combines numerically. Three kinds of events are reported:

* ``degenerate``: a tracked critical point loses nondegeneracy or changes index
  (birth/death);
* ``count``: a periodic full search finds a different number of critical points;
* ``alignment``: the three normalized gradients nearly coincide somewhere, where
  a Θ solution can shrink to a point and leave the moduli space.

A scan without events is the a-posteriori certificate that both ends lie in one
chamber.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import structlog
from scipy.optimize import minimize

from .errors import NonGeneric, Unresolved
from .invariant import z23_pipeline
from .morse import MorseFunction, MorseSystem, Point, find_critical_points
from .reports import VerificationReport

log = structlog.get_logger(__name__)


@dataclass(frozen=True)
class ChamberEvent:
    kind: str
    s: float
    function: str | None = None
    detail: dict[str, Any] = field(default_factory=dict)

    def to_json(self) -> dict[str, Any]:
        return {"kind": self.kind, "s": self.s, "function": self.function, "detail": self.detail}


@dataclass
class ScanReport:
    steps: int
    events: list[ChamberEvent] = field(default_factory=list)
    min_hessian_det: dict[str, float] = field(default_factory=dict)
    min_alignment: float = float("inf")

    @property
    def clean(self) -> bool:
        return not self.events

    def to_json(self) -> dict[str, Any]:
        return {
            "steps": self.steps,
            "clean": self.clean,
            "events": [e.to_json() for e in self.events],
            "min_hessian_det": self.min_hessian_det,
            "min_alignment": self.min_alignment,
        }


class _Segment:
    """One function of the interpolated family, evaluated by linear combination."""

    def __init__(self, a: MorseFunction, b: MorseFunction):
        self.a = a
        self.b = b
        self.name = f"{a.name}~{b.name}"

    def gradient(self, s: float, chart: int, x: np.ndarray) -> np.ndarray:
        return (1 - s) * self.a.gradient(chart, x) + s * self.b.gradient(chart, x)

    def hessian(self, s: float, chart: int, x: np.ndarray) -> np.ndarray:
        return (1 - s) * self.a.hessian(chart, x) + s * self.b.hessian(chart, x)

    def direction(self, s: float, point: Point) -> np.ndarray | None:
        """Unit descent direction at ``point`` in its chart, None at a zero."""
        g = self.gradient(s, point.chart, point.array)
        norm = np.linalg.norm(g)
        return None if norm == 0 else -g / norm


def _track(
    segment: _Segment, s: float, point: Point, steps: int = 12
) -> tuple[Point, np.ndarray] | None:
    """Newton continuation of a critical point to parameter ``s``."""
    x = point.array
    for _ in range(steps):
        g = segment.gradient(s, point.chart, x)
        try:
            x = x - np.linalg.solve(segment.hessian(s, point.chart, x), g)
        except np.linalg.LinAlgError:
            return None
        if not np.all(np.isfinite(x)):
            return None
    moved = Point(point.chart, tuple(float(c) for c in x)).normalized()
    return moved, np.linalg.eigvalsh(segment.hessian(s, moved.chart, moved.array))


def _alignment(segments: Sequence[_Segment], s: float, point: Point) -> float:
    """Largest pairwise gap between the unit descent directions at ``point``.

    A vanishing gradient counts as the maximal gap 2.
    """
    directions = [seg.direction(s, point) for seg in segments]
    if any(d is None for d in directions):
        return 2.0
    return max(
        float(np.linalg.norm(directions[i] - directions[j]))
        for i in range(len(directions))
        for j in range(i + 1, len(directions))
    )


def _refine_alignment(segments: Sequence[_Segment], s: float, point: Point) -> tuple[float, Point]:
    chart = point.chart
    result = minimize(
        lambda x: _alignment(segments, s, Point(chart, tuple(x))) ** 2,
        point.array,
        method="Nelder-Mead",
        options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 2000},
    )
    best = Point(chart, tuple(float(c) for c in result.x))
    return float(np.sqrt(max(result.fun, 0.0))), best


def scan_interpolation(
    start: MorseSystem,
    end: MorseSystem,
    step: float = 1e-3,
    *,
    recount_every: int = 100,
    samples: int = 256,
    alignment_tol: float = 0.05,
) -> ScanReport:
    """Walk ``s`` from 0 to 1 and collect bifurcation events.

    Args:
        start: The system at ``s = 0``.
        end: The system at ``s = 1``; same number of functions and metric.
        step: Parameter increment.
        recount_every: Steps between full critical-point searches.
        samples: Seeded sample points for the gradient-alignment monitor.
        alignment_tol: Sampled gap below which a local minimization is run.
    """
    if len(start.functions) != len(end.functions):
        raise ValueError("systems have different numbers of functions")
    if not 0 < step <= 1:
        raise ValueError(f"step must lie in (0, 1], got {step}")
    settings = start.settings
    tol = settings.tolerances
    segments = [_Segment(a, b) for a, b in zip(start.functions, end.functions)]
    count = int(np.ceil(1.0 / step))
    report = ScanReport(steps=count)
    rng = np.random.default_rng([settings.seed, 7])
    probes = [Point.from_ambient(v) for v in rng.normal(size=(samples, 4))]

    tracked: list[list[tuple[Point, int]]] = []
    for i, segment in enumerate(segments):
        points = start.critical_points(i)
        tracked.append([(cp.point, cp.index) for cp in points])
        report.min_hessian_det[segment.name] = min(
            (abs(cp.hessian_det) for cp in points), default=float("inf")
        )

    for k in range(1, count + 1):
        s = min(k * step, 1.0)
        for i, segment in enumerate(segments):
            moved = []
            for point, index in tracked[i]:
                result = _track(segment, s, point)
                if result is None:
                    report.events.append(
                        ChamberEvent("degenerate", s, segment.name, {"lost": point.to_json()})
                    )
                    continue
                new_point, eigenvalues = result
                det = float(abs(np.prod(eigenvalues)))
                report.min_hessian_det[segment.name] = min(report.min_hessian_det[segment.name], det)
                new_index = int(np.sum(eigenvalues < 0))
                if det < tol.nd or new_index != index:
                    report.events.append(
                        ChamberEvent(
                            "degenerate",
                            s,
                            segment.name,
                            {"point": new_point.to_json(), "index": [index, new_index], "det": det},
                        )
                    )
                moved.append((new_point, new_index))
            tracked[i] = moved
            if k % recount_every == 0 or k == count:
                try:
                    found = find_critical_points(segment.a.combine(segment.b, s), settings)
                except NonGeneric as exc:
                    report.events.append(ChamberEvent("degenerate", s, segment.name, {"error": str(exc)}))
                    continue
                if len(found) != len(tracked[i]):
                    report.events.append(
                        ChamberEvent(
                            "count", s, segment.name, {"tracked": len(tracked[i]), "found": len(found)}
                        )
                    )
                    tracked[i] = [(cp.point, cp.index) for cp in found]

        if len(segments) == 3:
            gaps = [_alignment(segments, s, p) for p in probes]
            best = int(np.argmin(gaps))
            gap = gaps[best]
            if gap < alignment_tol:
                gap, where = _refine_alignment(segments, s, probes[best])
                if gap < tol.ms:
                    report.events.append(
                        ChamberEvent("alignment", s, None, {"point": where.to_json(), "gap": gap})
                    )
            report.min_alignment = min(report.min_alignment, gap)

        if k % recount_every == 0:
            log.debug("scan progress", s=s, events=len(report.events))

    log.info(
        "interpolation scanned",
        steps=count,
        events=len(report.events),
        min_alignment=report.min_alignment,
    )
    return report


def chamber_invariance(
    start: MorseSystem, end: MorseSystem, step: float = 1e-3
) -> tuple[VerificationReport, dict[str, Any]]:
    """Compare the ``Z_{2,3}`` classes of two systems in one chamber.

    Raises:
        Unresolved: If the scan reports a bifurcation; the classes are then not
            expected to agree.
    """
    scan = scan_interpolation(start, end, step)
    if not scan.clean:
        first = scan.events[0]
        log.warning("bifurcation between systems", kind=first.kind, s=first.s)
        raise Unresolved(
            f"{len(scan.events)} bifurcation events, first {first.kind!r} at s = {first.s:.4g}"
        )
    report = VerificationReport(check="chamber-invariance")
    z_start, start_report = z23_pipeline(start)
    z_end, end_report = z23_pipeline(end)
    if z_start != z_end:
        report.fail(start=z_start.coords, end=z_end.coords)
    report.stats = {"scan": scan.to_json()}
    return report, {"start": start_report, "end": end_report, "scan": scan.to_json()}
