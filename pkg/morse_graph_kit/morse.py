"""Morse functions on S³, gradient flows and Morse complexes.

S³ is covered by two copies of ℝ³. Chart 0 is stereographic projection from
``(0, 0, 0, 1)``; chart 1 is ``y = (x1, x2, −x3)/|x|²``, an orientation-preserving
involution. Both charts see the round metric as ``(2/(1+|x|²))²`` times the
Euclidean one, so the negative gradient flow is ``ẋ = −((1+|x|²)²/4)∇f``. The
``"chart"`` metric drops the conformal factor.

Functions are sympy expressions per chart; values, gradients, Hessians and the
Jacobian of the flow field are lambdified to numpy.
"""

from __future__ import annotations

from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass
from typing import Any

import numpy as np
import structlog
import sympy
from scipy.integrate import solve_ivp
from scipy.optimize import root
from sympy.parsing.sympy_parser import parse_expr

from .chain import BasedChainComplex, reduced_complex
from .config import FunctionSpec, IntegratorConfig, Settings, SystemConfig
from .errors import ConfigError, InconsistentInput, IntegrationFailure, NonGeneric, Unresolved

log = structlog.get_logger(__name__)

__all__ = [
    "CriticalPoint",
    "MorseFunction",
    "MorseSystem",
    "Point",
    "find_critical_points",
    "flow",
    "flow_with_jacobian",
    "morse_complex",
    "reduced_complex",
]

AMBIENT = sympy.symbols("X1:5", real=True)
CHART = sympy.symbols("x1:4", real=True)
_REFLECT = np.array([1.0, 1.0, -1.0])


# -- charts -------------------------------------------------------------------


def transition(x: np.ndarray) -> np.ndarray:
    """Chart change ``x ↦ (x1, x2, −x3)/|x|²`` (its own inverse)."""
    return _REFLECT * x / (x @ x)


def transition_jacobian(x: np.ndarray) -> np.ndarray:
    r2 = x @ x
    return np.diag(_REFLECT) @ (np.eye(3) / r2 - 2.0 * np.outer(x, x) / r2**2)


def _chart_inverse_exprs(chart: int) -> list[sympy.Expr]:
    """Ambient coordinates ``X1..X4`` as expressions in chart coordinates."""
    x = sympy.Matrix(CHART)
    r2 = sum(c**2 for c in CHART)
    if chart == 1:
        x = sympy.Matrix([CHART[0], CHART[1], -CHART[2]])
    head = [2 * c / (1 + r2) for c in x]
    tail = (r2 - 1) / (1 + r2) if chart == 0 else (1 - r2) / (1 + r2)
    return [*head, tail]


@dataclass(frozen=True)
class Point:
    """A point of S³ in chart coordinates."""

    chart: int
    coords: tuple[float, float, float]

    @classmethod
    def from_ambient(cls, ambient: Sequence[float], chart: int | None = None) -> Point:
        X = np.asarray(ambient, dtype=float)
        X = X / np.linalg.norm(X)
        if chart is None:
            chart = 0 if X[3] <= 0 else 1
        if chart == 0:
            coords = X[:3] / (1.0 - X[3])
        else:
            coords = _REFLECT * X[:3] / (1.0 + X[3])
        return cls(chart, tuple(float(c) for c in coords))

    @property
    def array(self) -> np.ndarray:
        return np.array(self.coords, dtype=float)

    def ambient(self) -> np.ndarray:
        x = self.array
        r2 = x @ x
        if self.chart == 1:
            x = _REFLECT * x
            return np.concatenate((2 * x / (1 + r2), [(1 - r2) / (1 + r2)]))
        return np.concatenate((2 * x / (1 + r2), [(r2 - 1) / (1 + r2)]))

    def in_chart(self, chart: int) -> Point:
        if chart == self.chart:
            return self
        return Point(chart, tuple(float(c) for c in transition(self.array)))

    def normalized(self) -> Point:
        """The same point in the chart where ``|x| ≤ 1``."""
        x = self.array
        if x @ x <= 1.0:
            return self
        return self.in_chart(1 - self.chart)

    def distance(self, other: Point) -> float:
        return float(np.linalg.norm(self.ambient() - other.ambient()))

    def to_json(self) -> dict[str, Any]:
        return {
            "chart": self.chart,
            "coords": list(self.coords),
            "ambient": [float(v) for v in self.ambient()],
        }


# -- functions ----------------------------------------------------------------


def _parse(text: str, symbols: Sequence[sympy.Symbol], key: str) -> sympy.Expr:
    names = {str(s): s for s in symbols}
    try:
        expr = parse_expr(text, local_dict=names)
    except (SyntaxError, TypeError, sympy.SympifyError) as exc:
        raise ConfigError(f"cannot parse {text!r}", key) from exc
    unknown = {str(s) for s in expr.free_symbols} - set(names)
    if unknown:
        raise ConfigError(f"unknown symbols {sorted(unknown)}", key)
    return expr


def _vector(fn: Callable[..., Any]) -> Callable[[np.ndarray], np.ndarray]:
    def call(x: np.ndarray) -> np.ndarray:
        return np.asarray(fn(*x), dtype=float).reshape(-1)

    return call


def _matrix(fn: Callable[..., Any]) -> Callable[[np.ndarray], np.ndarray]:
    def call(x: np.ndarray) -> np.ndarray:
        return np.asarray(fn(*x), dtype=float).reshape(3, 3)

    return call


class MorseFunction:
    """A smooth function on S³ given by one expression per chart.

    Args:
        name: Identifier used in generator names and logs.
        charts: Expressions in ``x1, x2, x3`` for chart 0 and chart 1.
        metric: ``"round"`` or ``"chart"``.
        declared: Ambient points the configuration lists as critical.
    """

    def __init__(
        self,
        name: str,
        charts: tuple[sympy.Expr, sympy.Expr],
        metric: str = "round",
        declared: Sequence[Sequence[float]] = (),
    ):
        self.name = name
        self.charts = charts
        self.metric = metric
        self.declared = tuple(tuple(float(c) for c in p) for p in declared)
        r2 = sum(c**2 for c in CHART)
        conformal = (1 + r2) ** 2 / 4 if metric == "round" else sympy.Integer(1)
        self._value = []
        self._gradient = []
        self._hessian = []
        self._field = []
        self._field_jacobian = []
        for expr in charts:
            grad = sympy.Matrix([sympy.diff(expr, c) for c in CHART])
            field = -conformal * grad
            self._value.append(sympy.lambdify(CHART, expr, "numpy"))
            self._gradient.append(_vector(sympy.lambdify(CHART, grad, "numpy")))
            self._hessian.append(_matrix(sympy.lambdify(CHART, sympy.hessian(expr, CHART), "numpy")))
            self._field.append(_vector(sympy.lambdify(CHART, field, "numpy")))
            self._field_jacobian.append(
                _matrix(sympy.lambdify(CHART, field.jacobian(CHART), "numpy"))
            )

    @classmethod
    def from_ambient(
        cls,
        name: str,
        expr: str | sympy.Expr,
        metric: str = "round",
        declared: Sequence[Sequence[float]] = (),
    ) -> MorseFunction:
        """Restrict an expression in ``X1..X4`` to S³ through both charts."""
        if isinstance(expr, str):
            expr = _parse(expr, AMBIENT, f"functions.{name}.ambient")
        charts = tuple(
            expr.subs(dict(zip(AMBIENT, _chart_inverse_exprs(chart))), simultaneous=True)
            for chart in (0, 1)
        )
        return cls(name, charts, metric, declared)

    @classmethod
    def from_spec(cls, spec: FunctionSpec, metric: str = "round") -> MorseFunction:
        if spec.ambient is not None:
            return cls.from_ambient(spec.name, spec.ambient, metric, spec.critical_points)
        chart0 = _parse(spec.chart0, CHART, f"functions.{spec.name}.chart0")
        if spec.chart1 is not None:
            chart1 = _parse(spec.chart1, CHART, f"functions.{spec.name}.chart1")
        else:
            r2 = sum(c**2 for c in CHART)
            image = [CHART[0] / r2, CHART[1] / r2, -CHART[2] / r2]
            chart1 = chart0.subs(dict(zip(CHART, image)), simultaneous=True)
        return cls(spec.name, (chart0, chart1), metric, spec.critical_points)

    def combine(self, other: MorseFunction, s: float) -> MorseFunction:
        """``(1 − s)·self + s·other``."""
        s = sympy.sympify(s)
        charts = tuple((1 - s) * a + s * b for a, b in zip(self.charts, other.charts))
        return MorseFunction(f"{self.name}~{other.name}", charts, self.metric)

    def value(self, point: Point) -> float:
        return float(self._value[point.chart](*point.coords))

    def value_at(self, chart: int, x: np.ndarray) -> float:
        return float(self._value[chart](*x))

    def gradient(self, chart: int, x: np.ndarray) -> np.ndarray:
        return self._gradient[chart](x)

    def hessian(self, chart: int, x: np.ndarray) -> np.ndarray:
        return self._hessian[chart](x)

    def field(self, chart: int, x: np.ndarray) -> np.ndarray:
        """Negative gradient for the configured metric."""
        return self._field[chart](x)

    def field_jacobian(self, chart: int, x: np.ndarray) -> np.ndarray:
        return self._field_jacobian[chart](x)

    def __repr__(self) -> str:
        return f"MorseFunction({self.name!r}, metric={self.metric!r})"


@dataclass(frozen=True)
class CriticalPoint:
    name: str
    point: Point
    index: int
    value: float
    hessian_det: float

    def to_json(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "point": self.point.to_json(),
            "index": self.index,
            "value": self.value,
            "hessian_det": self.hessian_det,
        }


class MorseSystem:
    """A tuple of Morse functions on S³ with shared numerical settings."""

    def __init__(
        self,
        functions: Sequence[MorseFunction],
        metric: str = "round",
        settings: Settings | None = None,
    ):
        self.functions = tuple(functions)
        self.metric = metric
        self.settings = settings or Settings()
        self._critical: dict[int, list[CriticalPoint]] = {}

    @classmethod
    def from_config(cls, config: SystemConfig) -> MorseSystem:
        functions = [MorseFunction.from_spec(spec, config.metric) for spec in config.functions]
        return cls(functions, config.metric, config.settings)

    def with_settings(self, settings: Settings) -> MorseSystem:
        return MorseSystem(self.functions, self.metric, settings)

    def interpolate(self, other: MorseSystem, s: float) -> MorseSystem:
        if len(other.functions) != len(self.functions):
            raise ValueError("systems have different numbers of functions")
        functions = [a.combine(b, s) for a, b in zip(self.functions, other.functions)]
        return MorseSystem(functions, self.metric, self.settings)

    def function(self, i: int) -> MorseFunction:
        try:
            return self.functions[i]
        except IndexError:
            raise IndexError(f"no function {i}; the system has {len(self.functions)}") from None

    def critical_points(self, i: int) -> list[CriticalPoint]:
        if i not in self._critical:
            self._critical[i] = find_critical_points(self.function(i), self.settings)
        return self._critical[i]

    def validate(self) -> dict[str, Any]:
        """Check declared critical points and report value ordering.

        Raises:
            NonGeneric: If a declared point is not critical or is degenerate.
        """
        tol = self.settings.tolerances
        report: dict[str, Any] = {}
        for i, fn in enumerate(self.functions):
            for ambient in fn.declared:
                point = Point.from_ambient(ambient)
                x = point.array
                gradient = np.linalg.norm(fn.gradient(point.chart, x))
                if gradient > tol.crit:
                    raise NonGeneric(
                        f"declared point {list(ambient)} of {fn.name} has |grad| = {gradient:.3e}"
                    )
                det = np.linalg.det(fn.hessian(point.chart, x))
                if abs(det) < tol.nd:
                    raise NonGeneric(f"declared point {list(ambient)} of {fn.name} is degenerate")
            points = self.critical_points(i)
            values = sorted(cp.value for cp in points)
            distinct = all(b - a > tol.ms for a, b in zip(values, values[1:]))
            report[fn.name] = {
                "critical_points": len(points),
                "indices": [cp.index for cp in points],
                "distinct_values": distinct,
                "perfect": len(points) == 2,
            }
        return report


# -- flows --------------------------------------------------------------------


@dataclass(frozen=True)
class FlowResult:
    """Endpoint of an integration, the flow derivative and whether a level stop fired."""

    point: Point
    jacobian: np.ndarray | None
    elapsed: float
    stopped: bool = False


def integrate(
    fn: MorseFunction,
    start: Point,
    t: float,
    config: IntegratorConfig,
    *,
    variational: bool = False,
    stop_value: float | None = None,
) -> FlowResult:
    """Integrate ``ẋ = sign(t)·V(x)`` for ``|t|``, switching charts on exit.

    With ``variational`` the derivative ``DΦ`` is integrated alongside
    (``M′ = DV·M``, ``M ↦ Dψ·M`` at chart changes). ``stop_value`` ends the run
    when ``f`` reaches that value.

    Raises:
        IntegrationFailure: On solver failure, non-finite states, excessive
            time or too many chart changes.
    """
    if not np.isfinite(t) or abs(t) > config.max_t:
        raise IntegrationFailure(f"flow time {t} exceeds max_t = {config.max_t}")
    direction = 1.0 if t >= 0 else -1.0
    chart = start.chart
    x = start.array
    jac = np.eye(3)
    radius2 = config.chart_radius**2
    if x @ x > radius2:
        jac = transition_jacobian(x) @ jac
        x = transition(x)
        chart = 1 - chart

    remaining = abs(t)
    elapsed = 0.0
    switches = 0
    stopped = False
    while remaining > 0:

        def rhs(_: float, y: np.ndarray, chart: int = chart) -> np.ndarray:
            v = direction * fn.field(chart, y[:3])
            if not variational:
                return v
            dv = direction * fn.field_jacobian(chart, y[:3])
            return np.concatenate((v, (dv @ y[3:].reshape(3, 3)).ravel()))

        def leave(_: float, y: np.ndarray) -> float:
            return y[:3] @ y[:3] - radius2

        leave.terminal = True
        leave.direction = 1
        events = [leave]
        if stop_value is not None:

            def reach(_: float, y: np.ndarray, chart: int = chart) -> float:
                return fn.value_at(chart, y[:3]) - stop_value

            reach.terminal = True
            reach.direction = -direction
            events.append(reach)

        y0 = np.concatenate((x, jac.ravel())) if variational else x
        sol = solve_ivp(
            rhs,
            (0.0, remaining),
            y0,
            method=config.method,
            rtol=config.rtol,
            atol=config.atol,
            events=events,
        )
        if sol.status < 0:
            raise IntegrationFailure(f"integrator failed: {sol.message}")
        y = sol.y[:, -1]
        if not np.all(np.isfinite(y)):
            raise IntegrationFailure("integration produced non-finite values")
        x = y[:3]
        if variational:
            jac = y[3:].reshape(3, 3)
        elapsed += sol.t[-1]
        remaining -= sol.t[-1]
        if sol.status != 1:
            break
        if stop_value is not None and sol.t_events[1].size:
            stopped = True
            break
        switches += 1
        if switches > config.max_chart_switches:
            raise IntegrationFailure("too many chart changes")
        jac = transition_jacobian(x) @ jac
        x = transition(x)
        chart = 1 - chart

    return FlowResult(
        Point(chart, tuple(float(c) for c in x)),
        jac if variational else None,
        direction * elapsed,
        stopped,
    )


def flow(system: MorseSystem, i: int, x: Point, t: float) -> Point:
    """``Φ^t_{f_i}(x)`` for ``t ≥ 0``, returned in the chart of ``x`` when possible."""
    if t < 0:
        raise ValueError(f"flow time must be non-negative, got {t}")
    if t == 0:
        return x
    result = integrate(system.function(i), x, t, system.settings.integrator)
    end = result.point
    if end.chart != x.chart and end.array @ end.array > 1e-12:
        candidate = end.in_chart(x.chart)
        if candidate.array @ candidate.array <= system.settings.integrator.chart_radius**2:
            return candidate
    return end


def flow_with_jacobian(
    system: MorseSystem, i: int, x: Point, t: float
) -> tuple[Point, np.ndarray]:
    """Signed-time flow with its derivative, chart of the endpoint as reached."""
    result = integrate(system.function(i), x, t, system.settings.integrator, variational=True)
    return result.point, result.jacobian


# -- critical points ----------------------------------------------------------


def _polish(fn: MorseFunction, chart: int, x: np.ndarray, steps: int = 8) -> np.ndarray:
    for _ in range(steps):
        g = fn.gradient(chart, x)
        try:
            x = x - np.linalg.solve(fn.hessian(chart, x), g)
        except np.linalg.LinAlgError:
            break
    return x


def _eigenframe(fn: MorseFunction, point: Point) -> tuple[np.ndarray, np.ndarray]:
    """Hessian eigenvalues (ascending) and eigenvectors, each with its largest
    component positive."""
    values, vectors = np.linalg.eigh(fn.hessian(point.chart, point.array))
    for k in range(3):
        col = vectors[:, k]
        if col[np.argmax(np.abs(col))] < 0:
            vectors[:, k] = -col
    return values, vectors


def find_critical_points(fn: MorseFunction, settings: Settings) -> list[CriticalPoint]:
    """Multi-start root finding of ``∇f`` over S³.

    Starts are the declared points plus ``24·grid_density²`` seeded uniform
    samples; roots are polished by Newton steps and deduplicated in ℝ⁴.

    Raises:
        NonGeneric: If a critical point is degenerate.
    """
    tol = settings.tolerances
    rng = np.random.default_rng(settings.seed)
    samples = rng.normal(size=(24 * settings.solver.grid_density**2, 4))
    starts = [np.asarray(p, dtype=float) for p in fn.declared] + list(samples)

    found: list[Point] = []
    for ambient in starts:
        start = Point.from_ambient(ambient)
        chart = start.chart
        sol = root(
            lambda x, chart=chart: fn.gradient(chart, x),
            start.array,
            jac=lambda x, chart=chart: fn.hessian(chart, x),
            method="hybr",
        )
        x = sol.x
        if not np.all(np.isfinite(x)):
            continue
        x = _polish(fn, chart, x)
        if not np.all(np.isfinite(x)) or x @ x > 1e8:
            continue
        point = Point(chart, tuple(float(c) for c in x)).normalized()
        x = _polish(fn, point.chart, point.array)
        point = Point(point.chart, tuple(float(c) for c in x))
        if np.linalg.norm(fn.gradient(point.chart, x)) > tol.crit:
            continue
        if any(point.distance(other) < tol.dedup for other in found):
            continue
        found.append(point)

    points = []
    for point in found:
        values, _ = _eigenframe(fn, point)
        det = float(np.prod(values))
        if abs(det) < tol.nd:
            raise NonGeneric(f"degenerate critical point of {fn.name} at {point.ambient().tolist()}")
        points.append((fn.value(point), tuple(np.round(point.ambient(), 9)), point, values, det))
    points.sort(key=lambda item: (item[0], item[1]))
    out = [
        CriticalPoint(f"c{k}", point, int(np.sum(values < 0)), value, det)
        for k, (value, _, point, values, det) in enumerate(points)
    ]
    log.info(
        "critical points found",
        function=fn.name,
        count=len(out),
        indices=[cp.index for cp in out],
    )
    return out


# -- Morse complex ------------------------------------------------------------


def _nearest(points: Sequence[CriticalPoint], end: Point) -> tuple[CriticalPoint, float]:
    best = min(points, key=lambda cp: cp.point.distance(end))
    return best, best.point.distance(end)


def _settle(
    fn: MorseFunction,
    points: Sequence[CriticalPoint],
    start: Point,
    settings: Settings,
    backward: bool,
) -> CriticalPoint:
    cfg = settings.integrator
    result = integrate(fn, start, -cfg.max_t if backward else cfg.max_t, cfg)
    target, distance = _nearest(points, result.point)
    if distance > max(100 * settings.tolerances.ms, 1e-3):
        raise NonGeneric(
            f"trajectory of {fn.name} from {start.ambient().tolist()} does not settle "
            f"(closest critical point {target.name} at distance {distance:.3e})"
        )
    return target


def _count_down_from_index_one(
    fn: MorseFunction, p: CriticalPoint, points: Sequence[CriticalPoint], settings: Settings
) -> dict[str, int]:
    _, vectors = _eigenframe(fn, p.point)
    u = vectors[:, 0]
    counts: dict[str, int] = {}
    for branch in (1, -1):
        start = Point(p.point.chart, tuple(p.point.array + branch * settings.solver.shoot_offset * u))
        target = _settle(fn, points, start, settings, backward=False)
        if target.index != 0:
            raise NonGeneric(f"{p.name} flows into {target.name} of index {target.index}")
        counts[target.name] = counts.get(target.name, 0) + branch
    return counts


def _count_up_to_index_three(
    fn: MorseFunction,
    q: CriticalPoint,
    points: Sequence[CriticalPoint],
    settings: Settings,
) -> dict[str, int]:
    """Back-shooting along the ascending line of an index-2 point.

    A branch ``q + b·δ·a`` that rises to ``p`` contributes
    ``sign det(E_p) · (−b) · sign det(a, f1, f2)`` where ``E_p`` is the Hessian
    frame of ``p`` and ``(f1, f2)`` orients the descending disk of ``q``.
    """
    _, frame_q = _eigenframe(fn, q.point)
    f1, f2, a = frame_q[:, 0], frame_q[:, 1], frame_q[:, 2]
    q_sign = np.sign(np.linalg.det(np.column_stack((a, f1, f2))))
    counts: dict[str, int] = {}
    for branch in (1, -1):
        start = Point(q.point.chart, tuple(q.point.array + branch * settings.solver.shoot_offset * a))
        p = _settle(fn, points, start, settings, backward=True)
        if p.index != 3:
            raise NonGeneric(f"{q.name} rises into {p.name} of index {p.index}")
        _, frame_p = _eigenframe(fn, p.point)
        p_sign = np.sign(np.linalg.det(frame_p))
        counts[p.name] = counts.get(p.name, 0) + int(p_sign * -branch * q_sign)
    return counts


def _side(
    fn: MorseFunction,
    p: CriticalPoint,
    q: CriticalPoint,
    frame: np.ndarray,
    u_q: np.ndarray,
    theta: float,
    settings: Settings,
) -> tuple[float, float] | None:
    """``(⟨y − q, u_q⟩, |y − q|)`` where the trajectory leaving ``p`` at angle
    ``theta`` reaches the level ``f(q) + δ``; None if it never does."""
    offset = settings.solver.shoot_offset
    direction = np.cos(theta) * frame[:, 0] + np.sin(theta) * frame[:, 1]
    start = Point(p.point.chart, tuple(p.point.array + offset * direction))
    cfg = settings.integrator
    result = integrate(fn, start, cfg.max_t, cfg, stop_value=q.value + offset)
    if not result.stopped:
        return None
    y = result.point.in_chart(q.point.chart).array - q.point.array
    return float(y @ u_q), float(np.linalg.norm(y))


def _circle_count(
    fn: MorseFunction, p: CriticalPoint, q: CriticalPoint, settings: Settings, phase: float
) -> int:
    _, frame_p = _eigenframe(fn, p.point)
    frame = frame_p[:, :2]
    _, frame_q = _eigenframe(fn, q.point)
    u_q = frame_q[:, 0]
    samples = settings.solver.circle_samples
    near = 10.0 * np.sqrt(settings.solver.shoot_offset)
    thetas = 2 * np.pi * (np.arange(samples) + phase) / samples
    sides = [_side(fn, p, q, frame, u_q, theta, settings) for theta in thetas]

    total = 0
    crossings: list[float] = []
    for k in range(samples):
        lo, hi = thetas[k], thetas[k] + 2 * np.pi / samples
        a, b = sides[k], sides[(k + 1) % samples]
        if a is None or b is None or np.sign(a[0]) == np.sign(b[0]):
            continue
        sign_lo = np.sign(a[0])
        closest = min(a[1], b[1])
        genuine = True
        for _ in range(48):
            mid = (lo + hi) / 2
            m = _side(fn, p, q, frame, u_q, mid, settings)
            if m is None:
                genuine = False
                break
            closest = min(closest, m[1])
            if np.sign(m[0]) == sign_lo:
                lo = mid
            else:
                hi = mid
            if hi - lo < 1e-12:
                break
        if genuine and closest < near:
            total += int(np.sign(b[0]) - sign_lo) // 2
            crossings.append((lo + hi) / 2)
    crossings.sort()
    for first, second in zip(crossings, crossings[1:]):
        if second - first < settings.tolerances.ms:
            raise NonGeneric(f"trajectories {p.name} → {q.name} are not transverse")
    return total


def _count_index_two_to_one(
    fn: MorseFunction, p: CriticalPoint, q: CriticalPoint, settings: Settings
) -> int:
    """Signed crossings of the descending circle of ``p`` with the ascending
    manifold of ``q``, cross-checked over the two seed phases."""
    results = [
        _circle_count(fn, p, q, settings, phase=1.0 / (seed + 2))
        for seed in settings.solver.seeds
    ]
    if len(set(results)) != 1:
        raise Unresolved(f"circle shooting {p.name} → {q.name} disagrees across phases: {results}")
    return results[0]


def morse_complex(
    system: MorseSystem, i: int, orientations: Mapping[str, int] | None = None
) -> BasedChainComplex:
    """Morse complex of ``f_i``; generators are named by ascending critical value.

    Orientations of the descending disks come from the Hessian eigenframes,
    multiplied by ``orientations[name]`` (default +1). The boundary coefficient
    of ``q`` in ``∂p`` is the intersection number of the descending sphere of
    ``p`` with the ascending sphere of ``q`` in a level between them.

    Raises:
        NonGeneric: On degenerate or non-Morse–Smale data.
        Unresolved: If independent shooting runs disagree.
    """
    fn = system.function(i)
    settings = system.settings
    points = system.critical_points(i)
    signs = {cp.name: (orientations or {}).get(cp.name, 1) for cp in points}
    basis: list[list[str]] = [[] for _ in range(4)]
    for cp in points:
        basis[cp.index].append(cp.name)
    position = {name: k for names in basis for k, name in enumerate(names)}
    boundary = [sympy.zeros(len(basis[k]), len(basis[k + 1])) for k in range(3)]
    by_index = {k: [cp for cp in points if cp.index == k] for k in range(4)}

    for p in by_index[1]:
        for name, count in _count_down_from_index_one(fn, p, points, settings).items():
            boundary[0][position[name], position[p.name]] += count * signs[p.name] * signs[name]
    for p in by_index[2]:
        for q in by_index[1]:
            count = _count_index_two_to_one(fn, p, q, settings)
            boundary[1][position[q.name], position[p.name]] += count * signs[p.name] * signs[q.name]
    for q in by_index[2]:
        for name, count in _count_up_to_index_three(fn, q, points, settings).items():
            boundary[2][position[q.name], position[name]] += count * signs[q.name] * signs[name]

    try:
        complex = BasedChainComplex(basis, boundary)
    except InconsistentInput as exc:
        raise NonGeneric(f"shooting counts of {fn.name} violate ∂∘∂ = 0") from exc
    log.info(
        "morse complex computed",
        function=fn.name,
        sizes=[len(b) for b in basis],
        homology=complex.homology_dimensions(),
    )
    return complex
