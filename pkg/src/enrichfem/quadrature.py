"""Gauss-Legendre rules on intervals, plus interface-split composite rules.

Integrands on an interface element are discontinuous at the interface, so a
single polynomial rule is useless there; ``split_rule`` concatenates two
one-sided rules and tags every point with the side it belongs to.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateSubinterval, UnsupportedOrder

MAX_POINTS = 30


@dataclass(frozen=True)
class QuadRule:
    """Quadrature points/weights, with an optional side tag per point.

    ``sides[i]`` is -1 for points left of an interface, +1 right of it, and
    0 when no side distinction applies.
    """

    points: np.ndarray
    weights: np.ndarray
    sides: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.sides is None:
            object.__setattr__(self, "sides", np.zeros(len(self.points), dtype=int))


def _reference_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    """n-point Gauss-Legendre nodes/weights on [-1, 1].

    Nodes are found by Newton iteration on the Legendre recurrence starting
    from the Chebyshev-based initial guess; no tabulated values.
    """
    if n == 1:
        return np.array([0.0]), np.array([2.0])
    k = np.arange(n)
    x = np.cos(np.pi * (4 * k + 3) / (4 * n + 2))
    for _ in range(100):
        # evaluate P_n and P_n' by the three-term recurrence
        p_prev = np.ones_like(x)
        p = x.copy()
        for m in range(2, n + 1):
            p_prev, p = p, ((2 * m - 1) * x * p - (m - 1) * p_prev) / m
        dp = n * (x * p - p_prev) / (x * x - 1.0)
        dx = p / dp
        x -= dx
        if np.max(np.abs(dx)) < 1e-15:
            break
    # one clean-up pass for the weights
    p_prev = np.ones_like(x)
    p = x.copy()
    for m in range(2, n + 1):
        p_prev, p = p, ((2 * m - 1) * x * p - (m - 1) * p_prev) / m
    dp = n * (x * p - p_prev) / (x * x - 1.0)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    order = np.argsort(x)
    return x[order], w[order]


_cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def gauss_rule(n: int, interval: tuple[float, float]) -> QuadRule:
    """Gauss-Legendre rule with ``n`` points mapped onto ``interval``."""
    if not 1 <= n <= MAX_POINTS:
        raise UnsupportedOrder(f"point count {n} outside 1..{MAX_POINTS}")
    if n not in _cache:
        _cache[n] = _reference_rule(n)
    x, w = _cache[n]
    c, d = interval
    half = 0.5 * (d - c)
    return QuadRule(points=c + half * (x + 1.0), weights=half * w)


def split_rule(element: tuple[float, float], alpha: float, n: int) -> QuadRule:
    """Composite rule on ``element`` split at the interface ``alpha``.

    Applies an ``n``-point Gauss rule on each of [x_k, alpha] and
    [alpha, x_k+1]; points carry side tags -1 / +1 for one-sided evaluation.
    """
    xk, xk1 = element
    h = xk1 - xk
    if min(alpha - xk, xk1 - alpha) < 1e-13 * h:
        raise DegenerateSubinterval(
            f"interface {alpha} splits [{xk}, {xk1}] into a degenerate piece"
        )
    left = gauss_rule(n, (xk, alpha))
    right = gauss_rule(n, (alpha, xk1))
    return QuadRule(
        points=np.concatenate([left.points, right.points]),
        weights=np.concatenate([left.weights, right.weights]),
        sides=np.concatenate([-np.ones(n, dtype=int), np.ones(n, dtype=int)]),
    )
