"""
The Carlen-Lieb norm.

For Hermitian ``Y`` the norm is the minimum of ``psi(diag(Y + A, A))`` over
slacks ``A >= 0`` with ``Y + A >= 0``, where the two diagonal blocks live in
an inside factor of doubled dimension. General matrices go through the
Hermitian dilation ``[[0, Y], [Y^*, 0]]`` and the triple-bar norm, halved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._optimize import projected_descent
from .core import (
    DEFAULT_CONFIG,
    NormEstimate,
    NormOrder,
    OptimizerConfig,
    _as_operator,
    block_diag_inside,
    diagonal_blocks_inside,
    initial_slack,
    offdiag_embed,
    psi,
    psi_gradient,
    require_convex_regime,
    triple_bar_norm,
)
from .errors import DomainError, RegimeError
from .linalg import BipartiteOperator, min_eig, project_feasible_cl


@dataclass
class CLResult:
    estimate: NormEstimate
    optimal_A: np.ndarray
    hermitian_path: bool = True

    @property
    def value(self) -> float:
        return self.estimate.value

    @property
    def upper(self) -> float:
        return self.estimate.upper


def cl_objective(Y: BipartiteOperator, A: np.ndarray, ord: NormOrder) -> float:
    Ym = Y.matrix
    return psi(block_diag_inside(Ym + A, A, Y.n, Y.m), ord)


def cl_norm_hermitian(Y, ord: NormOrder, cfg: OptimizerConfig = DEFAULT_CONFIG) -> CLResult:
    """Carlen-Lieb norm of a Hermitian matrix by projected gradient descent.

    The objective is convex, so a converged run gives the norm up to the
    solver tolerance; ``upper`` is always a feasible objective value.
    """
    require_convex_regime(ord)
    Y = _as_operator(Y)
    if not Y.is_hermitian(1e-10):
        raise DomainError("cl_norm_hermitian needs a Hermitian matrix")
    Ym = 0.5 * (Y.matrix + Y.matrix.conj().T)
    Y = Y.with_matrix(Ym)
    n, m = Y.n, Y.m
    if not np.any(Ym):
        return CLResult(NormEstimate.exact(0.0), np.zeros_like(Ym))

    def f(A):
        return psi(block_diag_inside(Ym + A, A, n, m), ord)

    def grad(A):
        G = psi_gradient(block_diag_inside(Ym + A, A, n, m), ord)
        G0, G1 = diagonal_blocks_inside(G, n, m)
        return G0 + G1

    res = projected_descent(
        f, grad, lambda A: project_feasible_cl(A, Ym), initial_slack(Ym), cfg
    )
    # A = 0 is feasible for Y >= 0 and is sometimes optimal on the boundary
    candidates = [(res.value, res.x)]
    if min_eig(Ym) >= -1e-12:
        zero = np.zeros_like(Ym)
        candidates.append((f(zero), zero))
    value, A = min(candidates, key=lambda c: c[0])
    status = "converged" if res.converged else "bracket-only"
    est = NormEstimate(value, 0.0, value, status, res.iterations, A)
    return CLResult(est, A, True)


def cl_norm_general(Y, ord: NormOrder, cfg: OptimizerConfig = DEFAULT_CONFIG) -> CLResult:
    """Carlen-Lieb norm of an arbitrary matrix through its Hermitian dilation."""
    require_convex_regime(ord)
    Y = _as_operator(Y)
    X = offdiag_embed(Y)
    est = triple_bar_norm(X, ord, cfg)
    half = NormEstimate(
        0.5 * est.value, 0.5 * est.lower, 0.5 * est.upper, est.status, est.iterations, est.witness
    )
    return CLResult(half, est.witness, False)


def cl_norm(Y, ord: NormOrder, cfg: OptimizerConfig = DEFAULT_CONFIG) -> CLResult:
    """Dispatch to the Hermitian fast path when possible."""
    Y = _as_operator(Y)
    if Y.is_hermitian(1e-10):
        return cl_norm_hermitian(Y, ord, cfg)
    return cl_norm_general(Y, ord, cfg)


def cl_lower_p2(Y, ord: NormOrder) -> float:
    """Certified lower bound ``psi(Y)/sqrt(2)`` valid for ``p = 2 <= q``."""
    if ord.p != 2 or not ord.q >= 2:
        raise RegimeError(f"the p = 2 lower bound needs p = 2 <= q, got {ord}")
    return psi(Y, ord) / math.sqrt(2.0)


def theorem1_constant(ord: NormOrder) -> float:
    """Constant ``2^(3 - 1/p)`` relating the NC norm to the Carlen-Lieb norm."""
    if not 1 <= ord.p <= 2:
        raise RegimeError(f"constant defined for 1 <= p <= 2, got p = {ord.p}")
    return 2.0 ** (3.0 - 1.0 / ord.p)


def find_nonmonotone_pair(
    Y, ord: NormOrder, cfg: OptimizerConfig = DEFAULT_CONFIG, min_gap: float = 1e-7
) -> Optional[dict]:
    """Look for ``0 <= Y <= Y + B`` with ``||Y||_CL > ||Y + B||_CL``.

    ``B`` is the optimal slack of ``Y`` itself; a nonzero slack always
    gives such a pair, since ``||Y + B||_CL <= psi(Y + B) < ||Y||_CL``. Returns ``None`` when the
    slack vanishes or the gap is below ``min_gap``.
    """
    Y = _as_operator(Y)
    if not Y.is_hermitian(1e-10) or min_eig(Y.matrix) < -1e-10 * max(1.0, float(np.max(np.abs(Y.matrix)))):
        raise DomainError("monotonicity is a statement about positive semidefinite matrices")
    base = cl_norm_hermitian(Y, ord, cfg)
    B = 0.5 * (base.optimal_A + base.optimal_A.conj().T)
    if np.linalg.norm(B) < 1e-9:
        return None
    Yb = Y.with_matrix(Y.matrix + B)
    bigger = cl_norm_hermitian(Yb, ord, cfg)
    if "bracket-only" in (base.estimate.status, bigger.estimate.status):
        return None
    # both problems are convex and converged, so the two values are the norms
    # up to the solver tolerance; only report gaps well above it
    gap = base.upper - bigger.upper
    if gap <= max(min_gap, 10 * cfg.tol * base.upper):
        return None
    return {
        "cl_Y": base.upper,
        "cl_Y_plus_B": bigger.upper,
        "psi_Y_plus_B": psi(Yb, ord),
        "gap": gap,
        "slack": B,
    }
