"""Counting gradient-flow Θ graphs.

A point of the moduli space of the Θ graph for ``(f_1, f_2, f_3)`` is
``(x_A, x_B, t_1, t_2, t_3)`` with ``Φ^{t_k}_{f_k}(x_A) = x_B`` and ``t_k > 0``.
Solutions are roots of the defect map

    E_k = x_B − Φ^{t_k}_{f_k}(x_A)        (in the chart of x_B)

in the unknowns ``(x_A, x_B, s_1, s_2, s_3)`` with ``t_k = exp(s_k)``. The
sign of a solution is the sign of the 9×9 Jacobian determinant with columns
ordered ``x_A, x_B, s_1, s_2, s_3`` and rows ``E_1, E_2, E_3``. A relabeled
graph reorders the vertex and edge blocks and writes a reversed edge as
``x_A − Φ^{−t}(x_B)``; its determinant differs by the orientation sign of the
relabeling.
"""

from __future__ import annotations

from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import structlog

from .config import Settings, thread_limit
from .errors import IntegrationFailure, NonGeneric, Unresolved
from .graph import Labeling
from .morse import MorseSystem, Point, integrate, transition_jacobian

log = structlog.get_logger(__name__)

REFERENCE = Labeling((1, 2), (1, 2, 3))


@dataclass(frozen=True)
class EdgeFlow:
    """Linearization of one edge at a solution.

    ``jacobian`` maps tangent vectors at ``x_A`` (its chart) to ``x_B`` (its
    chart); ``field_a``/``field_b`` are the flow fields at the two ends.
    """

    time: float
    jacobian: np.ndarray
    field_a: np.ndarray
    field_b: np.ndarray


@dataclass(frozen=True)
class FlowSolution:
    x: Point
    y: Point
    times: tuple[float, float, float]
    sign: int
    residual: float
    jacobian_det: float
    edges: tuple[EdgeFlow, ...] = field(repr=False, compare=False, default=())

    def to_json(self) -> dict[str, Any]:
        return {
            "x": self.x.to_json(),
            "y": self.y.to_json(),
            "times": list(self.times),
            "sign": self.sign,
            "residual": self.residual,
            "jacobian_det": self.jacobian_det,
        }


@dataclass
class ThetaCount:
    total: int
    solutions: list[FlowSolution]
    grid_totals: dict[int, int] = field(default_factory=dict)

    def to_json(self) -> dict[str, Any]:
        return {
            "total": self.total,
            "solutions": [s.to_json() for s in self.solutions],
            "grid_totals": {str(k): v for k, v in sorted(self.grid_totals.items())},
        }


def labeled_jacobian(edges: Sequence[EdgeFlow], labeling: Labeling) -> np.ndarray:
    """Defect Jacobian of the relabeled Θ graph at one solution."""
    jac = np.zeros((9, 9))
    a_col = 3 * (labeling.vertex_map[0] - 1)
    b_col = 3 * (labeling.vertex_map[1] - 1)
    for edge, label in zip(edges, labeling.label_map):
        rows = slice(3 * (label - 1), 3 * label)
        s_col = 6 + label - 1
        if label in labeling.flips:
            jac[rows, a_col : a_col + 3] = np.eye(3)
            jac[rows, b_col : b_col + 3] = -np.linalg.inv(edge.jacobian)
            jac[rows, s_col] = edge.time * edge.field_a
        else:
            jac[rows, a_col : a_col + 3] = -edge.jacobian
            jac[rows, b_col : b_col + 3] = np.eye(3)
            jac[rows, s_col] = -edge.time * edge.field_b
    return jac


def labeled_count(solutions: Sequence[FlowSolution], labeling: Labeling) -> int:
    """Signed count of the relabeled Θ graph from the same solution set."""
    return int(
        sum(np.sign(np.linalg.det(labeled_jacobian(s.edges, labeling))) for s in solutions)
    )


def _edge_flows(
    system: MorseSystem, a: Point, b: Point, s: np.ndarray
) -> tuple[np.ndarray, list[EdgeFlow]]:
    cfg = system.settings.integrator
    defects = []
    edges = []
    for k, fn in enumerate(system.functions):
        t = float(np.exp(s[k]))
        result = integrate(fn, a, t, cfg, variational=True)
        end, jac = result.point, result.jacobian
        if end.chart != b.chart:
            y = end.array
            jac = transition_jacobian(y) @ jac
            end = end.in_chart(b.chart)
        defects.append(b.array - end.array)
        edges.append(
            EdgeFlow(t, jac, fn.field(a.chart, a.array), fn.field(b.chart, end.array))
        )
    return np.concatenate(defects), edges


def _newton(
    system: MorseSystem, a: Point, b: Point, s: np.ndarray
) -> FlowSolution | None:
    settings = system.settings
    tol = settings.tolerances
    solver = settings.solver
    log_max = np.log(settings.integrator.max_t)
    try:
        defect, edges = _edge_flows(system, a, b, s)
        norm = np.max(np.abs(defect))
        for _ in range(solver.max_newton_steps):
            if norm <= tol.sol:
                break
            jac = labeled_jacobian(edges, REFERENCE)
            try:
                step = np.linalg.solve(jac, -defect)
            except np.linalg.LinAlgError:
                return None
            damping = 1.0
            while damping > 1e-4:
                trial_s = s + damping * step[6:]
                if np.any(trial_s > log_max):
                    damping /= 2
                    continue
                trial_a = Point(a.chart, tuple(a.array + damping * step[:3])).normalized()
                trial_b = Point(b.chart, tuple(b.array + damping * step[3:6])).normalized()
                trial_defect, trial_edges = _edge_flows(system, trial_a, trial_b, trial_s)
                trial_norm = np.max(np.abs(trial_defect))
                if trial_norm < norm:
                    a, b, s = trial_a, trial_b, trial_s
                    defect, edges, norm = trial_defect, trial_edges, trial_norm
                    break
                damping /= 2
            else:
                return None
    except IntegrationFailure:
        return None
    if norm > tol.sol:
        return None
    times = tuple(float(np.exp(v)) for v in s)
    if min(times) < solver.min_time:
        return None
    det = float(np.linalg.det(labeled_jacobian(edges, REFERENCE)))
    if abs(det) < tol.jac:
        raise NonGeneric(
            f"singular Θ solution at {a.ambient().tolist()} (|det J| = {abs(det):.3e})"
        )
    return FlowSolution(a, b, times, int(np.sign(det)), float(norm), det, tuple(edges))


def check_nonparallel(system: MorseSystem, samples: int = 64) -> None:
    """Reject pairs of functions whose gradients are parallel everywhere.

    Raises:
        NonGeneric: If two normalized flow fields agree at every sample point.
    """
    rng = np.random.default_rng(system.settings.seed)
    points = [Point.from_ambient(v) for v in rng.normal(size=(samples, 4))]
    fields = []
    for fn in system.functions:
        rows = []
        for p in points:
            v = fn.field(p.chart, p.array)
            n = np.linalg.norm(v)
            rows.append(v / n if n > 0 else v)
        fields.append(np.array(rows))
    for i in range(len(fields)):
        for j in range(i + 1, len(fields)):
            gap = min(
                np.max(np.linalg.norm(fields[i] - fields[j], axis=1)),
                np.max(np.linalg.norm(fields[i] + fields[j], axis=1)),
            )
            if gap < system.settings.tolerances.ms:
                raise NonGeneric(
                    f"{system.functions[i].name} and {system.functions[j].name} "
                    "have parallel gradients"
                )


def _seeds(system: MorseSystem, grid_seed: int) -> list[tuple[Point, Point, np.ndarray]]:
    solver = system.settings.solver
    rng = np.random.default_rng([system.settings.seed, grid_seed])
    cfg = system.settings.integrator
    first = system.functions[0]
    seeds = []
    for ambient in rng.normal(size=(8 * solver.grid_density**2, 4)):
        a = Point.from_ambient(ambient)
        for t0 in solver.time_seeds:
            try:
                b = integrate(first, a, t0, cfg).point.normalized()
            except IntegrationFailure:
                continue
            seeds.append((a, b, np.full(3, np.log(t0))))
    return seeds


def _dedupe(solutions: Sequence[FlowSolution], radius: float) -> list[FlowSolution]:
    ordered = sorted(
        solutions,
        key=lambda s: (tuple(np.round(s.x.ambient(), 8)), tuple(np.round(s.y.ambient(), 8))),
    )
    kept: list[FlowSolution] = []
    for sol in ordered:
        if any(_same(sol, other, radius) for other in kept):
            continue
        kept.append(sol)
    return kept


def _same(first: FlowSolution, second: FlowSolution, radius: float) -> bool:
    return first.x.distance(second.x) < radius and first.y.distance(second.y) < radius


def _solve_grid(system: MorseSystem, grid_seed: int) -> list[FlowSolution]:
    seeds = _seeds(system, grid_seed)
    with ThreadPoolExecutor(max_workers=thread_limit()) as pool:
        results = list(pool.map(lambda seed: _newton(system, *seed), seeds))
    found = [r for r in results if r is not None]
    kept = _dedupe(found, system.settings.tolerances.dedup)
    log.info(
        "theta grid solved",
        grid=grid_seed,
        seeds=len(seeds),
        converged=len(found),
        solutions=len(kept),
    )
    return kept


def count_theta_flows(system: MorseSystem, settings: Settings | None = None) -> ThetaCount:
    """Signed count of gradient Θ graphs for three functions.

    Both seed grids of ``settings.solver.seeds`` are solved independently and
    must produce the same deduplicated solution set.

    Raises:
        ValueError: If the system does not have three functions.
        NonGeneric: On parallel gradients or a singular solution Jacobian.
        Unresolved: If the two grids disagree.
    """
    if settings is not None:
        system = system.with_settings(settings)
    if len(system.functions) != 3:
        raise ValueError(f"Θ counting needs three functions, got {len(system.functions)}")
    check_nonparallel(system)

    radius = system.settings.tolerances.dedup
    grids = {seed: _solve_grid(system, seed) for seed in system.settings.solver.seeds}
    first, second = (grids[seed] for seed in system.settings.solver.seeds)
    matched = len(first) == len(second) and all(
        any(_same(a, b, radius) for b in second) for a in first
    )
    if not matched:
        log.error(
            "theta grids disagree",
            sizes={str(k): len(v) for k, v in grids.items()},
        )
        raise Unresolved(
            f"seed grids found {len(first)} and {len(second)} solutions; refine the grid"
        )
    total = sum(s.sign for s in first)
    log.info("theta flows counted", total=total, solutions=len(first))
    return ThetaCount(
        total=total,
        solutions=first,
        grid_totals={seed: sum(s.sign for s in sols) for seed, sols in grids.items()},
    )
