"""
Exponent bookkeeping, the Carlen-Lieb functional and the triple-bar norm.

The functional evaluated here is

    psi(Y) = ( Tr_1 (Tr_2 Y^p)^(q/p) )^(1/q)

on positive semidefinite bipartite operators, together with its Frechet
gradient. ``triple_bar_norm`` minimizes ``psi(X + A) + psi(A)`` over the
slack ``A`` with ``A >= 0`` and ``X + A >= 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Literal, Optional

import numpy as np

from ._optimize import projected_descent
from .errors import DomainError, InvalidExponentError, RegimeError
from .linalg import (
    BipartiteOperator,
    eigh,
    frechet_power,
    lift_outside,
    partial_trace,
    project_feasible_cl,
    psd_project,
    schatten_norm,
)

PSD_TOL = 1e-10

Status = Literal["closed-form", "converged", "bracket-only"]


def conjugate_exponent(t: float) -> float:
    """Return ``t'`` with ``1/t + 1/t' = 1``."""
    if not t >= 1:
        raise InvalidExponentError(f"conjugate exponent needs t >= 1, got {t}")
    if t == 1:
        return math.inf
    if math.isinf(t):
        return 1.0
    return t / (t - 1.0)


def _inv(t: float) -> float:
    return 0.0 if math.isinf(t) else 1.0 / t


@dataclass(frozen=True)
class NormOrder:
    """The exponent pair (p, q) and the quantities derived from it.

    ``r`` satisfies ``1/r = |1/p - 1/q|`` and is infinite exactly when
    ``p == q``.
    """

    p: float
    q: float
    r: float
    p_dual: float
    q_dual: float
    r_dual: float

    @property
    def regime(self) -> Literal["p<=q", "q<p"]:
        return "p<=q" if self.p <= self.q else "q<p"

    @property
    def inv_r(self) -> float:
        return _inv(self.r)

    def dual(self) -> "NormOrder":
        return make_order(self.p_dual, self.q_dual)

    def __str__(self) -> str:
        return f"(p={self.p:g}, q={self.q:g})"


def make_order(p: float, q: float) -> NormOrder:
    p, q = float(p), float(q)
    for name, t in (("p", p), ("q", q)):
        if not t >= 1:
            raise InvalidExponentError(f"{name} must lie in [1, inf], got {t}")
    inv_r = abs(_inv(p) - _inv(q))
    r = math.inf if inv_r == 0.0 else 1.0 / inv_r
    return NormOrder(
        p=p,
        q=q,
        r=r,
        p_dual=conjugate_exponent(p),
        q_dual=conjugate_exponent(q),
        r_dual=conjugate_exponent(r),
    )


@dataclass
class NormEstimate:
    """A norm value with a bracket ``lower <= value <= upper``."""

    value: float
    lower: float
    upper: float
    status: Status
    iterations: int = 0
    witness: Optional[Any] = field(default=None, repr=False)

    @classmethod
    def exact(cls, value: float, witness=None) -> "NormEstimate":
        return cls(value, value, value, "closed-form", 0, witness)

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def as_dict(self) -> dict:
        return {
            "value": self.value,
            "lower": self.lower,
            "upper": self.upper,
            "status": self.status,
            "iterations": self.iterations,
        }


@dataclass(frozen=True)
class OptimizerConfig:
    tol: float = 1e-8
    max_iters: int = 5000
    restarts: int = 16
    seed: int = 0

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iters < 1 or self.restarts < 1:
            raise ValueError("max_iters and restarts must be at least 1")


DEFAULT_CONFIG = OptimizerConfig()


def _as_operator(Y, dims=None) -> BipartiteOperator:
    if isinstance(Y, BipartiteOperator):
        return Y
    M = np.atleast_2d(np.asarray(Y, dtype=complex))
    n, m = dims if dims is not None else (M.shape[0], 1)
    return BipartiteOperator(n, m, M)


def _psd_spectrum(M: np.ndarray, what: str = "Y"):
    spec = eigh(M)
    w = spec.eigenvalues
    scale = max(1.0, float(np.max(np.abs(w), initial=0.0)))
    if w.size and w[-1] < -PSD_TOL * scale:
        raise DomainError(f"{what} is not positive semidefinite (min eig {w[-1]:.3e})")
    return np.maximum(w, 0.0), spec.eigenvectors


def _require_finite(ord: NormOrder):
    if math.isinf(ord.p) or math.isinf(ord.q):
        raise InvalidExponentError("psi needs finite p and q")


def _outer(Y: BipartiteOperator, ord: NormOrder):
    w, U = _psd_spectrum(Y.matrix)
    Yp = (U * w**ord.p) @ U.conj().T
    T = partial_trace(Y.with_matrix(Yp), "inside")
    mu, V = _psd_spectrum(T, "Tr_2 Y^p")
    return mu, V


def psi(Y, ord: NormOrder) -> float:
    """Carlen-Lieb functional of a positive semidefinite bipartite operator."""
    _require_finite(ord)
    Y = _as_operator(Y)
    mu, _ = _outer(Y, ord)
    top = float(mu.max(initial=0.0))
    if top == 0.0:
        return 0.0
    s = ord.q / ord.p
    return top ** (1.0 / ord.p) * float(np.sum((mu / top) ** s)) ** (1.0 / ord.q)


def psi_gradient(Y, ord: NormOrder) -> np.ndarray:
    """Hermitian gradient ``G`` of psi, so that ``d psi = Tr(G dY)``.

    Zero eigenvalues of ``Tr_2 Y^p`` are excluded when ``q < p``, which means
    the gradient is the one of psi restricted to the support.
    """
    _require_finite(ord)
    Y = _as_operator(Y)
    p, q = ord.p, ord.q
    mu, V = _outer(Y, ord)
    val = psi(Y, ord)
    if val == 0.0:
        return np.zeros_like(Y.matrix)
    s = q / p
    thr = 1e-12 * float(mu.max())
    safe = np.where(mu > thr, mu, 1.0)
    mu_pow = np.where(mu > thr, safe ** (s - 1.0), 0.0)
    K = (V * mu_pow) @ V.conj().T
    inner = frechet_power(psd_project(Y.matrix), p, lift_outside(K, Y.m))
    G = val ** (1.0 - q) / p * inner
    return 0.5 * (G + G.conj().T)


def block_diag_inside(Y0: np.ndarray, Y1: np.ndarray, n: int, m: int) -> BipartiteOperator:
    """``Y0 (+) Y1`` as an operator on ``C^n (x) C^(2m)``, the block index
    becoming the leading part of the enlarged inside factor."""
    Z = np.zeros((n, 2, m, n, 2, m), dtype=complex)
    Z[:, 0, :, :, 0, :] = np.asarray(Y0).reshape(n, m, n, m)
    Z[:, 1, :, :, 1, :] = np.asarray(Y1).reshape(n, m, n, m)
    return BipartiteOperator(n, 2 * m, Z.reshape(2 * n * m, 2 * n * m))


def diagonal_blocks_inside(G: np.ndarray, n: int, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of ``block_diag_inside`` on the diagonal blocks."""
    T = np.asarray(G).reshape(n, 2, m, n, 2, m)
    d = n * m
    return T[:, 0, :, :, 0, :].reshape(d, d), T[:, 1, :, :, 1, :].reshape(d, d)


def offdiag_embed(Y: BipartiteOperator) -> BipartiteOperator:
    """The Hermitian matrix ``[[0, Y], [Y^*, 0]]`` on ``C^n (x) C^(2m)``."""
    n, m = Y.n, Y.m
    Z = np.zeros((n, 2, m, n, 2, m), dtype=complex)
    Z[:, 0, :, :, 1, :] = Y.matrix.reshape(n, m, n, m)
    Z[:, 1, :, :, 0, :] = Y.matrix.conj().T.reshape(n, m, n, m)
    return BipartiteOperator(n, 2 * m, Z.reshape(2 * n * m, 2 * n * m))


def require_convex_regime(ord: NormOrder):
    if not (1 <= ord.p <= 2 and ord.q >= 1) or math.isinf(ord.q):
        raise RegimeError(
            f"psi is only known to be convex for 1 <= p <= 2, finite q >= 1; got {ord}"
        )


def initial_slack(X: np.ndarray) -> np.ndarray:
    """Strictly feasible start ``(-X)_+ + 0.1 ||X||_inf I``."""
    return psd_project(-X) + 0.1 * schatten_norm(X, math.inf) * np.eye(X.shape[0])


def triple_bar_norm(X, ord: NormOrder, cfg: OptimizerConfig = DEFAULT_CONFIG) -> NormEstimate:
    """Minimize ``psi(X + A) + psi(A)`` over ``A >= 0, X + A >= 0``.

    ``upper`` is the best feasible objective found. No lower bound is
    available, so ``lower`` is 0.
    """
    require_convex_regime(ord)
    X = _as_operator(X)
    if not X.is_hermitian(1e-10):
        raise DomainError("triple-bar norm is defined for Hermitian matrices only")
    Xm = 0.5 * (X.matrix + X.matrix.conj().T)
    if not np.any(Xm):
        return NormEstimate.exact(0.0, np.zeros_like(Xm))

    def f(A):
        return psi(X.with_matrix(Xm + A), ord) + psi(X.with_matrix(A), ord)

    def grad(A):
        return psi_gradient(X.with_matrix(Xm + A), ord) + psi_gradient(X.with_matrix(A), ord)

    res = projected_descent(
        f, grad, lambda A: project_feasible_cl(A, Xm), initial_slack(Xm), cfg
    )
    status: Status = "converged" if res.converged else "bracket-only"
    return NormEstimate(res.value, 0.0, res.value, status, res.iterations, res.x)
