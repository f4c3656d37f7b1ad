"""
The divergence family and the non-monotonicity example.

The family is built in ``M_n (x) M_m`` with ``m = 2^n``: the inside index
labels the sign unitaries ``U_a`` and block ``a`` is the pure state
``U_a |psi><psi| U_a`` with ``|psi>_j = sqrt(lambda_j)``. Its two norms have
closed forms in ``lambda`` alone, so large ``n`` never touches a matrix.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .core import NormOrder, make_order, psi
from .errors import DimensionError, DomainError, RegimeError
from .linalg import BipartiteOperator

MAX_SIGN_N = 12
MAX_DENSE_N = 5


@dataclass(frozen=True)
class CounterexampleSpec:
    """Outside dimension ``n`` and the probability vector ``lambda``."""

    n: int
    lam: np.ndarray

    def __post_init__(self):
        lam = np.asarray(self.lam, dtype=float)
        if lam.shape != (self.n,):
            raise DimensionError(f"lambda must have length {self.n}")
        if np.any(lam < 0) or abs(lam.sum() - 1.0) > 1e-12:
            raise DomainError("lambda must be a probability vector")
        object.__setattr__(self, "lam", lam)

    @property
    def m(self) -> int:
        return 2**self.n

    @property
    def c(self) -> float:
        """The leading weight ``lambda_1``; ``1/H_n`` for the harmonic family."""
        return float(self.lam[0])


def sign_unitaries(n: int) -> list:
    """All ``2^n`` diagonal sign matrices, the identity first."""
    if not 1 <= n <= MAX_SIGN_N:
        raise DimensionError(f"sign unitaries enumerated for 1 <= n <= {MAX_SIGN_N}, got {n}")
    return [np.diag(s).astype(float) for s in itertools.product((1.0, -1.0), repeat=n)]


def build_family(spec: CounterexampleSpec) -> BipartiteOperator:
    """Dense block-diagonal family operator ``sum_a Y_a (x) |a><a|``."""
    n = spec.n
    if n > MAX_DENSE_N:
        raise DimensionError(f"dense family capped at n = {MAX_DENSE_N}, got {n}")
    m = spec.m
    psi_vec = np.sqrt(spec.lam)
    Z = np.zeros((n, m, n, m), dtype=complex)
    for a, U in enumerate(sign_unitaries(n)):
        v = U @ psi_vec
        Z[:, a, :, a] = np.outer(v, v)
    return BipartiteOperator(n, m, Z.reshape(n * m, n * m))


def _family_order(ord: NormOrder, what: str):
    if not ord.p < ord.q:
        raise RegimeError(f"{what} needs p < q, got {ord}")


def _vec_norm(x: np.ndarray, t: float) -> float:
    top = float(np.max(x))
    if math.isinf(t):
        return top
    return top * float(np.sum((x / top) ** t)) ** (1.0 / t)


def psi_closed(spec: CounterexampleSpec, ord: NormOrder) -> float:
    """``(2^n ||lambda||_{q/p})^(1/p)``."""
    _family_order(ord, "psi_closed")
    if not 1 <= ord.p <= 2:
        raise RegimeError(f"psi_closed needs 1 <= p <= 2, got {ord}")
    log_val = spec.n * math.log(2.0) + math.log(_vec_norm(spec.lam, ord.q / ord.p))
    return math.exp(log_val / ord.p)


def nc_closed(spec: CounterexampleSpec, ord: NormOrder) -> float:
    """``2^(n/p) ||lambda||_{r'}``, attained at the diagonal density ``c_j ~ lambda_j^r'``."""
    _family_order(ord, "nc_closed")
    return math.exp(spec.n * math.log(2.0) / ord.p) * _vec_norm(spec.lam, ord.r_dual)


def nc_closed_witness(spec: CounterexampleSpec, ord: NormOrder) -> np.ndarray:
    w = spec.lam**ord.r_dual
    return np.diag(w / w.sum())


def harmonic_lambda(n: int) -> CounterexampleSpec:
    """``lambda_j = c/j`` with ``c = 1/H_n``."""
    if n < 1:
        raise DimensionError("n must be positive")
    inv = 1.0 / np.arange(1, n + 1)
    return CounterexampleSpec(n, inv / inv.sum())


def h_function(t: float, terms: int = 10**6) -> float:
    """``(sum_k k^-t)^(1/t)`` from a partial sum and an Euler-Maclaurin tail."""
    if not t > 1:
        raise DomainError(f"the series diverges for t <= 1, got {t}")
    N = int(terms)
    if N < 1:
        raise ValueError("terms must be positive")
    k = np.arange(N, 0, -1, dtype=float)  # small terms first
    head = float(np.sum(k**-t))
    # sum_{k > N} k^-t = int_N^inf - f(N)/2 - f'(N)/12 + ...
    tail = N ** (1.0 - t) / (t - 1.0) - 0.5 * N**-t + t * N ** (-t - 1.0) / 12.0
    return (head + tail) ** (1.0 / t)


@dataclass
class DivergenceRow:
    n: int
    psi: float
    nc: float
    ratio: float
    paper_bound: float
    cl_nc_lower: Optional[float] = None

    def holds(self, ord: NormOrder) -> bool:
        return self.ratio**ord.p >= self.paper_bound * (1.0 - 1e-12)


def divergence_table(ord: NormOrder, n_min: int, n_max: int) -> list:
    """Closed-form rows ``(n, psi, nc, ratio, bound)`` on the harmonic family.

    ``bound`` is ``(ln n)^(p-1) / h(r')^p``, a lower bound on ``ratio^p``.
    At ``p = 2`` each row also carries ``ratio / sqrt 2``, a lower bound on
    the CL/NC ratio.
    """
    if not (1 <= ord.p <= 2 and ord.p < ord.q):
        raise RegimeError(f"divergence table needs 1 <= p <= 2 and p < q, got {ord}")
    if not 1 <= n_min <= n_max:
        raise ValueError("need 1 <= n_min <= n_max")
    h = h_function(ord.r_dual)
    rows = []
    for n in range(n_min, n_max + 1):
        spec = harmonic_lambda(n)
        a, b = psi_closed(spec, ord), nc_closed(spec, ord)
        # ratio from logs, since both values carry the factor 2^(n/p)
        ratio = _vec_norm(spec.lam, ord.q / ord.p) ** (1.0 / ord.p) / _vec_norm(spec.lam, ord.r_dual)
        bound = math.log(n) ** (ord.p - 1.0) / h**ord.p
        extra = ratio / math.sqrt(2.0) if ord.p == 2 else None
        rows.append(DivergenceRow(n, a, b, ratio, bound, extra))
    return rows


def is_monotone(values: Sequence[float], strict: bool = False, rtol: float = 1e-12) -> bool:
    v = np.asarray(values, dtype=float)
    d = np.diff(v)
    if strict:
        return bool(np.all(d > 0))
    return bool(np.all(d >= -rtol * np.abs(v[1:])))


def nonmono_example() -> tuple:
    """``(W, Y)``: a rank-one perturbation direction and a rank-two base point."""
    w = 3.0 - math.sqrt(10.0)
    W = np.zeros((4, 4))
    W[:2, :2] = [[w * w, w], [w, 1.0]]
    Y = np.zeros((4, 4))
    Y[0, 0] = 1.0
    Y[2:, 2:] = 0.5
    return W, Y


# 4x4 matrices read as M_2 (x) M_2 with either factor outside, or as M_4 (x) M_1
SPLITTINGS = ("2x2", "2x2-swapped", "4x1")


def _split(M: np.ndarray, splitting: str) -> BipartiteOperator:
    if splitting == "2x2":
        return BipartiteOperator(2, 2, M.astype(complex))
    if splitting == "2x2-swapped":
        return BipartiteOperator(2, 2, M.astype(complex)).swapped()
    if splitting == "4x1":
        return BipartiteOperator(4, 1, M.astype(complex))
    raise ValueError(f"unknown splitting {splitting!r}")


def nonmono_derivative(ord: NormOrder, t_step: float, splitting: str = "2x2") -> float:
    """One-sided estimate of ``g'(0+)`` for ``g(t) = psi(Y + tW)``.

    ``Y + tW`` leaves the PSD cone for ``t < 0``, so the central difference
    is taken at ``t = t_step``: ``(g(2h) - g(0)) / 2h``.
    """
    W, Y = nonmono_example()
    h = float(t_step)

    def g(t):
        return psi(_split(Y + t * W, splitting), ord)

    return (g(2 * h) - g(0.0)) / (2 * h)


@dataclass
class NonmonoPoint:
    p: float
    q: float
    splitting: str
    derivative: float
    derivative_half: float

    @property
    def stable(self) -> bool:
        return np.sign(self.derivative) == np.sign(self.derivative_half)


def default_grid() -> tuple:
    ps = np.round(np.arange(1.1, 1.95, 0.1), 10)
    qs = np.round(np.arange(1.1, 4.05, 0.1), 10)
    return ps, qs


def nonmono_scan(
    p_grid: Optional[Iterable[float]] = None,
    q_grid: Optional[Iterable[float]] = None,
    t_step: float = 1e-4,
    splittings: Sequence[str] = SPLITTINGS,
) -> list:
    """Derivative estimates over ``q >= p`` on the grid, each at ``t_step``
    and at ``t_step / 2``, for every requested splitting."""
    if p_grid is None or q_grid is None:
        dp, dq = default_grid()
        p_grid = dp if p_grid is None else p_grid
        q_grid = dq if q_grid is None else q_grid
    out = []
    for splitting in splittings:
        for p in p_grid:
            if not 1 <= p <= 2:
                raise RegimeError(f"scan needs 1 <= p <= 2, got p = {p}")
            for q in q_grid:
                if q < p:
                    continue
                ord = make_order(p, q)
                d1 = nonmono_derivative(ord, t_step, splitting)
                d2 = nonmono_derivative(ord, t_step / 2, splitting)
                out.append(NonmonoPoint(float(p), float(q), splitting, d1, d2))
    return out


def decreasing_points(points: Iterable[NonmonoPoint], threshold: float = -1e-6) -> list:
    """Points with a derivative below ``threshold`` at both step sizes."""
    return [pt for pt in points if pt.derivative < threshold and pt.derivative_half < threshold]
