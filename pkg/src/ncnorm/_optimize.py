"""Projected gradient loop with an Armijo backtracking line search."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

ARMIJO = 1e-4
MAX_HALVINGS = 50
STALL_ROUNDS = 5


@dataclass
class DescentResult:
    x: np.ndarray
    value: float
    iterations: int
    converged: bool


def _inner(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.real(np.vdot(a, b)))


def projected_descent(
    f: Callable[[np.ndarray], float],
    grad: Callable[[np.ndarray], np.ndarray],
    project: Callable[[np.ndarray], np.ndarray],
    x0: np.ndarray,
    cfg,
    maximize: bool = False,
) -> DescentResult:
    """Minimize (or maximize) ``f`` over the range of ``project``.

    Each step backtracks along the projection arc ``P(x - t g)`` starting at
    ``t = 1`` and halving until the Armijo condition holds. The run counts as
    converged once the relative objective change stays below ``cfg.tol`` for
    five consecutive iterations, or when no step can be accepted (a
    stationary point up to round-off).
    """
    sgn = -1.0 if maximize else 1.0
    x = project(x0)
    fx = sgn * f(x)
    quiet = 0
    for it in range(1, cfg.max_iters + 1):
        g = sgn * grad(x)
        t = 1.0
        accepted = False
        for _ in range(MAX_HALVINGS):
            xt = project(x - t * g)
            ft = sgn * f(xt)
            if np.isfinite(ft) and ft <= fx + ARMIJO * _inner(g, xt - x):
                accepted = True
                break
            t *= 0.5
        if not accepted:
            return DescentResult(x, sgn * fx, it, True)
        change = abs(ft - fx) / max(1.0, abs(fx))
        x, fx = xt, ft
        quiet = quiet + 1 if change < cfg.tol else 0
        if quiet >= STALL_ROUNDS:
            return DescentResult(x, sgn * fx, it, True)
    return DescentResult(x, sgn * fx, cfg.max_iters, False)
