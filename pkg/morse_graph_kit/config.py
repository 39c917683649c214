"""Numerical settings and TOML system configuration.

A system file describes the Morse functions on S³ and, optionally, the metric,
integrator, solver and tolerance settings::

    [functions.f1]
    ambient = "X4 + 0.2*X1*X2"

    [functions.f2]
    chart0 = "..."          # expression in x1, x2, x3
    chart1 = "..."

    [metric]
    kind = "round"

    [tolerances]
    sol = 1e-9
"""

from __future__ import annotations

import os
import sys
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any

from .errors import ConfigError

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

THREADS_ENV = "MGK_THREADS"
METRICS = ("round", "chart")


@dataclass(frozen=True)
class Tolerances:
    """Numerical thresholds.

    Attributes:
        crit: Gradient norm accepted at a critical point.
        nd: Minimum |det Hessian| of a nondegenerate critical point.
        sol: Residual accepted for a flow-graph solution.
        jac: Minimum |det J| of a transversal solution.
        dedup: Ambient distance below which two solutions coincide.
        ms: Distance threshold used by Morse–Smale and endpoint matching.
    """

    crit: float = 1e-10
    nd: float = 1e-8
    sol: float = 1e-9
    jac: float = 1e-7
    dedup: float = 1e-5
    ms: float = 1e-6


@dataclass(frozen=True)
class IntegratorConfig:
    method: str = "DOP853"
    rtol: float = 1e-11
    atol: float = 1e-12
    max_t: float = 60.0
    chart_radius: float = 2.0
    max_chart_switches: int = 200


@dataclass(frozen=True)
class SolverConfig:
    grid_density: int = 5
    seeds: tuple[int, int] = (0, 1)
    time_seeds: tuple[float, ...] = (0.3, 1.0, 3.0)
    max_newton_steps: int = 40
    min_time: float = 1e-3
    circle_samples: int = 240
    shoot_offset: float = 1e-4


@dataclass(frozen=True)
class Settings:
    tolerances: Tolerances = field(default_factory=Tolerances)
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)
    seed: int = 0

    def with_tolerances(self, **overrides: float | None) -> Settings:
        """Return a copy with the non-None tolerance overrides applied."""
        values = {k: v for k, v in overrides.items() if v is not None}
        unknown = set(values) - {f.name for f in fields(Tolerances)}
        if unknown:
            raise ConfigError("unknown tolerance", f"tolerances.{sorted(unknown)[0]}")
        return replace(self, tolerances=replace(self.tolerances, **values))


@dataclass(frozen=True)
class FunctionSpec:
    """One Morse function, given on S³ ⊂ ℝ⁴ or per chart."""

    name: str
    ambient: str | None = None
    chart0: str | None = None
    chart1: str | None = None
    critical_points: tuple[tuple[float, ...], ...] = ()


@dataclass(frozen=True)
class SystemConfig:
    functions: tuple[FunctionSpec, ...]
    metric: str = "round"
    settings: Settings = field(default_factory=Settings)


def thread_limit() -> int:
    """Worker thread cap from ``MGK_THREADS`` (default: CPU count)."""
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return max(1, os.cpu_count() or 1)
    try:
        value = int(raw)
    except ValueError as exc:
        raise ConfigError(f"expected an integer, got {raw!r}", THREADS_ENV) from exc
    return max(1, value)


def _section(
    data: dict[str, Any], name: str, cls: type, coerce: dict[str, type] | None = None
) -> Any:
    raw = data.get(name, {})
    if not isinstance(raw, dict):
        raise ConfigError("expected a table", name)
    allowed = {f.name: f for f in fields(cls)}
    values: dict[str, Any] = {}
    for key, value in raw.items():
        if key not in allowed:
            raise ConfigError("unknown key", f"{name}.{key}")
        default = getattr(cls(), key)
        try:
            if isinstance(default, tuple):
                cast = (coerce or {}).get(key, type(default[0]) if default else float)
                values[key] = tuple(cast(v) for v in value)
            elif isinstance(default, bool):
                values[key] = bool(value)
            else:
                values[key] = type(default)(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid value {value!r}", f"{name}.{key}") from exc
    return cls(**values)


def parse_system_config(data: dict[str, Any]) -> SystemConfig:
    """Validate a decoded TOML document.

    Raises:
        ConfigError: On unknown keys, wrong types or a missing ``functions`` table.
    """
    known = {"functions", "metric", "integrator", "solver", "tolerances", "seed"}
    for key in data:
        if key not in known:
            raise ConfigError("unknown section", key)

    raw_functions = data.get("functions")
    if not isinstance(raw_functions, dict) or not raw_functions:
        raise ConfigError("at least one function is required", "functions")

    specs = []
    for name, body in raw_functions.items():
        prefix = f"functions.{name}"
        if not isinstance(body, dict):
            raise ConfigError("expected a table", prefix)
        for key in body:
            if key not in {"ambient", "chart0", "chart1", "critical_points"}:
                raise ConfigError("unknown key", f"{prefix}.{key}")
        if body.get("ambient") is None and body.get("chart0") is None:
            raise ConfigError("needs 'ambient' or 'chart0'", prefix)
        if body.get("ambient") is not None and body.get("chart0") is not None:
            raise ConfigError("give either 'ambient' or chart expressions", prefix)
        points = body.get("critical_points", [])
        try:
            crit = tuple(tuple(float(c) for c in point) for point in points)
        except (TypeError, ValueError) as exc:
            raise ConfigError("expected lists of numbers", f"{prefix}.critical_points") from exc
        if any(len(point) != 4 for point in crit):
            raise ConfigError("points are ambient 4-vectors", f"{prefix}.critical_points")
        for key in ("ambient", "chart0", "chart1"):
            if body.get(key) is not None and not isinstance(body[key], str):
                raise ConfigError("expected an expression string", f"{prefix}.{key}")
        specs.append(
            FunctionSpec(
                name=name,
                ambient=body.get("ambient"),
                chart0=body.get("chart0"),
                chart1=body.get("chart1"),
                critical_points=crit,
            )
        )

    metric_table = data.get("metric", {})
    if not isinstance(metric_table, dict):
        raise ConfigError("expected a table", "metric")
    for key in metric_table:
        if key != "kind":
            raise ConfigError("unknown key", f"metric.{key}")
    metric = metric_table.get("kind", "round")
    if metric not in METRICS:
        raise ConfigError(f"must be one of {list(METRICS)}", "metric.kind")

    seed = data.get("seed", 0)
    if not isinstance(seed, int):
        raise ConfigError("expected an integer", "seed")

    settings = Settings(
        tolerances=_section(data, "tolerances", Tolerances),
        integrator=_section(data, "integrator", IntegratorConfig),
        solver=_section(data, "solver", SolverConfig, coerce={"seeds": int}),
        seed=seed,
    )
    if len(settings.solver.seeds) != 2:
        raise ConfigError("exactly two seed grids are compared", "solver.seeds")
    return SystemConfig(functions=tuple(specs), metric=metric, settings=settings)


def load_system_config(path: str | Path) -> SystemConfig:
    """Read and validate a TOML system file."""
    path = Path(path)
    try:
        with path.open("rb") as handle:
            data = tomllib.load(handle)
    except FileNotFoundError as exc:
        raise ConfigError("file not found", str(path)) from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML ({exc})", str(path)) from exc
    return parse_system_config(data)
