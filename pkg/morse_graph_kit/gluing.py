"""Gluing functions and the birth/death normal form.

Near a birth/death point a one-parameter family agrees with

    h_u(x) = c(u) + x1³/3 + u·x1 − (x2² + … + x_i²)/2 + (x_{i+1}² + … + x_d²)/2

for the standard metric, whose negative gradient is
``(−x1² − u, x2, …, x_i, −x_{i+1}, …, −x_d)``. For ``u > 0`` every trajectory
crosses the slab between ``L_ε = {x1 = ε}`` and ``L_{−ε}`` in time ``τ_ε(u)``;
for ``u < 0`` the two critical points ``(±√−u, 0, …)`` appear. ``σ_ε`` glues
the two regimes smoothly across ``u = 0``.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from scipy.special import comb

from .errors import DomainError


def _check_eps(eps: float) -> None:
    if eps <= 0:
        raise DomainError(f"eps must be positive, got {eps}")


def tau_epsilon(u: float, eps: float = 1.0) -> float:
    """Crossing time from ``L_ε`` to ``L_{−ε}`` for ``u > 0``.

    ``2·atan(ε/√u)/√u``; on ``0 < u < ε²`` this equals
    ``(atan(2ε√u/(u − ε²)) + π)/√u``.
    """
    _check_eps(eps)
    if u <= 0:
        raise DomainError(f"tau_epsilon needs u > 0, got {u}")
    root = np.sqrt(u)
    return float(2.0 * np.arctan(eps / root) / root)


def tau_series(u: float, eps: float = 1.0, terms: int = 30) -> float:
    """Truncated expansion ``π/√u − 2Σ_k (−1)^k u^k / ((2k+1)ε^{2k+1})``.

    Raises:
        DomainError: Outside the convergence interval ``0 < u < ε²``.
    """
    _check_eps(eps)
    if not 0 < u < eps * eps:
        raise DomainError(f"the expansion converges on 0 < u < {eps * eps}, got {u}")
    k = np.arange(terms, dtype=float)
    series = np.sum((-1.0) ** k * u**k / ((2 * k + 1) * eps ** (2 * k + 1)))
    return float(np.pi / np.sqrt(u) - 2.0 * series)


def sigma_epsilon(u: float, eps: float = 1.0) -> float:
    """``exp(−τ_ε(u))`` for ``u > 0`` and 0 otherwise; flat at ``u = 0``."""
    if u <= 0:
        _check_eps(eps)
        return 0.0
    return float(np.exp(-tau_epsilon(u, eps)))


def central_differences(
    u: float, eps: float = 1.0, step: float | None = None, orders: int = 3
) -> list[float]:
    """Central divided-difference estimates of the first ``orders`` derivatives
    of ``σ_ε`` at ``u``."""
    h = step if step is not None else u / 4
    estimates = []
    for n in range(1, orders + 1):
        total = 0.0
        for j in range(n + 1):
            offset = (n / 2 - j) * h
            total += (-1) ** j * comb(n, j, exact=True) * sigma_epsilon(u + offset, eps)
        estimates.append(total / h**n)
    return estimates


@dataclass(frozen=True)
class NormalForm:
    """``h_u`` on ``ℝ^d`` with ``i − 1`` expanding coordinates after ``x1``.

    Attributes:
        dim: Ambient dimension ``d``.
        index: ``i``; coordinates ``2..i`` expand and ``i+1..d`` contract.
        u: Unfolding parameter.
    """

    dim: int
    index: int
    u: float

    def __post_init__(self) -> None:
        if self.dim < 1 or not 1 <= self.index <= self.dim:
            raise DomainError(f"need 1 <= index <= dim, got index={self.index}, dim={self.dim}")

    @property
    def _expanding(self) -> slice:
        return slice(1, self.index)

    @property
    def _contracting(self) -> slice:
        return slice(self.index, self.dim)

    def value(self, x: Sequence[float]) -> float:
        x = np.asarray(x, dtype=float)
        return float(
            x[0] ** 3 / 3
            + self.u * x[0]
            - np.sum(x[self._expanding] ** 2) / 2
            + np.sum(x[self._contracting] ** 2) / 2
        )

    def field(self, x: Sequence[float]) -> np.ndarray:
        """Negative gradient for the standard metric."""
        x = np.asarray(x, dtype=float)
        v = np.empty(self.dim)
        v[0] = -x[0] ** 2 - self.u
        v[self._expanding] = x[self._expanding]
        v[self._contracting] = -x[self._contracting]
        return v

    def critical_points(self) -> list[np.ndarray]:
        if self.u > 0:
            return []
        root = np.sqrt(-self.u)
        points = []
        for x1 in sorted({root, -root}, reverse=True):
            p = np.zeros(self.dim)
            p[0] = x1
            points.append(p)
        return points

    def flow(self, x: Sequence[float], t: float) -> np.ndarray:
        """Closed-form trajectory ``γ(t)`` with ``γ(0) = x``."""
        x = np.asarray(x, dtype=float)
        g1 = x[0]
        if self.u > 0:
            root = np.sqrt(self.u)
            tangent = np.tan(root * t)
            first = (root * g1 - self.u * tangent) / (root + g1 * tangent)
        elif self.u < 0:
            root = np.sqrt(-self.u)
            tangent = np.tanh(root * t)
            first = root * (g1 + root * tangent) / (root + g1 * tangent)
        else:
            first = g1 / (1 + g1 * t)
        out = np.empty(self.dim)
        out[0] = first
        out[self._expanding] = x[self._expanding] * np.exp(t)
        out[self._contracting] = x[self._contracting] * np.exp(-t)
        return out

    def cross(self, start: Sequence[float], eps: float = 1.0) -> np.ndarray:
        """Where the trajectory through ``start ∈ L_ε`` meets ``L_{−ε}``.

        Raises:
            DomainError: If ``u ≤ 0`` or ``start`` is not on ``L_ε``.
        """
        start = np.asarray(start, dtype=float)
        if not np.isclose(start[0], eps):
            raise DomainError(f"start point is not on L_{eps}")
        tau = tau_epsilon(self.u, eps)
        out = start.copy()
        out[0] = -eps
        out[self._expanding] *= np.exp(tau)
        out[self._contracting] *= np.exp(-tau)
        return out

    def gluing_map(
        self, epsilons: Sequence[float], eps: float = 1.0
    ) -> tuple[np.ndarray, np.ndarray]:
        """``φ(u; ε_2, …, ε_d)`` as the pair of points on ``L_ε`` and ``L_{−ε}``.

        For ``u > 0`` these lie on one trajectory; for ``u ≤ 0`` they are the
        entry of the ascending manifold of the upper point and the exit of the
        descending manifold of the lower one.
        """
        tail = np.asarray(epsilons, dtype=float)
        if tail.shape != (self.dim - 1,):
            raise DomainError(f"expected {self.dim - 1} transverse coordinates")
        sigma = sigma_epsilon(self.u, eps)
        expanding = slice(0, self.index - 1)
        contracting = slice(self.index - 1, self.dim - 1)
        start = tail.copy()
        start[expanding] *= sigma
        goal = tail.copy()
        goal[contracting] *= sigma
        return np.concatenate(([eps], start)), np.concatenate(([-eps], goal))
