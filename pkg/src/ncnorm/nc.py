"""
The operator-space (Pisier-type) mixed norm ``||Y||_NC``.

For ``p <= q`` the norm is a supremum over outside scalings,

    ||Y||_NC = sup_{A, B} ||(A (x) I) Y (B (x) I)||_p / (||A||_2r ||B||_2r),

which for ``Y >= 0`` reduces to a concave maximization over density
matrices ``C`` of ``||(C^(1/2r) (x) I) Y (C^(1/2r) (x) I)||_p``. For
``q < p`` the norm is an infimum over factorizations and only a bracket is
computed: a single-term factorization gives the upper end and dual
witnesses paired with certified upper estimates of the dual norm give the
lower end.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize

from .core import (
    DEFAULT_CONFIG,
    NormEstimate,
    NormOrder,
    OptimizerConfig,
    _as_operator,
    make_order,
    psi,
)
from .errors import DomainError, RegimeError
from .linalg import (
    BipartiteOperator,
    eigh,
    frechet_power,
    frechet_spectral,
    hermitian,
    lift_outside,
    matrix_power,
    min_eig,
    partial_trace,
    project_density,
    schatten_norm,
)

# eigenvalue floor for start densities, so that log C is finite
DENSITY_FLOOR = 1e-13


@dataclass
class Decomposition:
    """Terms ``(A_i, Z_i, B_i)`` with ``sum (A_i (x) I) Z_i (B_i (x) I) = Y``."""

    terms: list = field(default_factory=list)
    m: int = 1

    def reconstruct(self) -> np.ndarray:
        return sum(
            lift_outside(A, self.m) @ Z @ lift_outside(B, self.m) for A, Z, B in self.terms
        )

    def cost(self, ord: NormOrder) -> float:
        return sum(
            schatten_norm(A, 2 * ord.r) * schatten_norm(B, 2 * ord.r) * schatten_norm(Z, ord.p)
            for A, Z, B in self.terms
        )


def _require_pleq(ord: NormOrder):
    if ord.p > ord.q:
        raise RegimeError(f"this routine needs p <= q, got {ord}")


def _require_qlep(ord: NormOrder):
    if ord.q > ord.p:
        raise RegimeError(f"this routine needs q <= p, got {ord}")


def _require_finite_p(ord: NormOrder):
    if math.isinf(ord.p):
        raise RegimeError("optimizer paths need a finite p")


def _schatten_dual(M: np.ndarray, p: float):
    """Return ``(||M||_p, G)`` with ``Tr(G M) = ||M||_p^p``, ``G = V S^(p-1) U^*``."""
    U, s, Vh = np.linalg.svd(M)
    if p == 1:
        sp = np.where(s > 0, 1.0, 0.0)
    else:
        sp = s ** (p - 1.0)
    G = (Vh.conj().T * sp) @ U.conj().T
    return float(np.sum(s**p)) ** (1.0 / p), G


def nc_objective(Y, C, ord: NormOrder) -> float:
    """``||(C^(1/2r) (x) I) Y (C^(1/2r) (x) I)||_p`` for a density ``C``."""
    _require_pleq(ord)
    Y = _as_operator(Y)
    if math.isinf(ord.r):
        return schatten_norm(Y.matrix, ord.p)
    K = lift_outside(matrix_power(C, 1.0 / (2.0 * ord.r)), Y.m)
    return schatten_norm(K @ Y.matrix @ K, ord.p)


def _pair_value_and_grads(Y: BipartiteOperator, A: np.ndarray, B: np.ndarray, p: float):
    """``||(A (x) I) Y (B (x) I)||_p`` and its Hermitian gradients in A and B."""
    m = Y.m
    LA, LB = lift_outside(A, m), lift_outside(B, m)
    M = LA @ Y.matrix @ LB
    val, G = _schatten_dual(M, p)
    if val == 0.0:
        z = np.zeros_like(A)
        return 0.0, z, z
    coef = val ** (1.0 - p)
    gA = partial_trace(Y.with_matrix(Y.matrix @ LB @ G), "inside")
    gB = partial_trace(Y.with_matrix(G @ LA @ Y.matrix), "inside")
    return val, coef * hermitian(gA), coef * hermitian(gB)


def nc_objective_gradient(Y, C, ord: NormOrder) -> np.ndarray:
    """Gradient of ``nc_objective`` with respect to ``C`` (C strictly positive)."""
    _require_pleq(ord)
    Y = _as_operator(Y)
    if math.isinf(ord.r):
        return np.zeros_like(np.asarray(C, dtype=complex))
    s = 1.0 / (2.0 * ord.r)
    K = matrix_power(C, s)
    _, gA, gB = _pair_value_and_grads(Y, K, K, ord.p)
    return hermitian(frechet_power(C, s, gA + gB))


def heuristic_density(Y: BipartiteOperator, ord: NormOrder) -> np.ndarray:
    """Starting density ``C ~ (Tr_2 |Y|^p)^(q/p)``.

    This is the exact optimizer for diagonal and for product operators.
    """
    M = Y.matrix
    absY = 0.5 * (matrix_power(M.conj().T @ M, ord.p / 2) + matrix_power(M @ M.conj().T, ord.p / 2))
    T = hermitian(partial_trace(Y.with_matrix(absY), "inside"))
    expo = 1.0 if math.isinf(ord.q) else ord.q / ord.p
    if math.isinf(ord.q):
        # limit of the q/p power: uniform on the top eigenspace of T
        spec = eigh(T)
        top = spec.eigenvalues[0]
        w = np.where(spec.eigenvalues > top * (1 - 1e-9), 1.0, 0.0)
        C = (spec.eigenvectors * w) @ spec.eigenvectors.conj().T
    else:
        C = matrix_power(T, expo)
    tr = np.trace(C).real
    if not tr > 0:
        return np.eye(Y.n, dtype=complex) / Y.n
    return project_density(C / tr, DENSITY_FLOOR)


def _random_density(n: int, rng: np.random.Generator) -> np.ndarray:
    G = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    C = G @ G.conj().T
    return C / np.trace(C).real


def _restart_rng(seed: int, k: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(k)])))


def _herm_to_vec(H: np.ndarray) -> np.ndarray:
    """Isometric real coordinates of a Hermitian matrix: ``<vec H, vec K> = Tr(HK)``."""
    iu = np.triu_indices(H.shape[0], 1)
    off = math.sqrt(2.0) * H[iu]
    return np.concatenate([np.diag(H).real, off.real, off.imag])


def _vec_to_herm(x: np.ndarray, n: int) -> np.ndarray:
    iu = np.triu_indices(n, 1)
    k = iu[0].size
    H = np.zeros((n, n), dtype=complex)
    H[iu] = (x[n : n + k] + 1j * x[n + k :]) / math.sqrt(2.0)
    H = H + H.conj().T
    H[np.diag_indices(n)] = x[:n]
    return H


@dataclass
class _ExpDensity:
    """``C = e^G / Tr e^G`` with ``E = (Z C)^sigma`` and the pieces needed to
    differentiate through the spectral calculus."""

    C: np.ndarray
    E: np.ndarray
    logZ: float
    dlogZ: np.ndarray
    shifted: np.ndarray
    sigma: float

    def pullback(self, gE: np.ndarray) -> np.ndarray:
        """Gradient in G of a function whose gradient in E is ``gE``."""
        s, L = self.sigma, LOG_SPREAD

        def f(x):
            return np.exp(s * np.maximum(x, -L))

        def df(x):
            return np.where(x > -L, s * np.exp(s * np.maximum(x, -L)), 0.0)

        return hermitian(frechet_spectral(self.shifted, f, df, gE))


# largest eigenvalue spread of G kept; C never drops below e^-60 of its top
LOG_SPREAD = 60.0


def _exp_density(G: np.ndarray, sigma: float) -> _ExpDensity:
    spec = eigh(G)
    w, U = spec.eigenvalues, spec.eigenvectors
    x = w - w[0]
    live = x > -LOG_SPREAD
    ex = np.exp(np.maximum(x, -LOG_SPREAD))
    Z = float(ex.sum())
    C = (U * (ex / Z)) @ U.conj().T
    E = (U * np.exp(sigma * np.maximum(x, -LOG_SPREAD))) @ U.conj().T
    dlogZ = (U * np.where(live, ex, 0.0) / Z) @ U.conj().T
    shifted = (U * x) @ U.conj().T
    return _ExpDensity(C, E, math.log(Z), dlogZ, shifted, sigma)


def _log_scaled_norm(Y: BipartiteOperator, Gs: list, sigma: float, p: float):
    """``log ||(C_A^sigma (x) I) Y (C_B^sigma (x) I)||_p`` and its G-gradients.

    ``Gs`` holds one matrix (``A = B``) or two. The densities are
    ``C = e^G / Tr e^G``, a diffeomorphism onto the interior of the density
    set, so no spurious critical points are introduced.
    """
    dA = _exp_density(Gs[0], sigma)
    dB = dA if len(Gs) == 1 else _exp_density(Gs[1], sigma)
    val, gA, gB = _pair_value_and_grads(Y, dA.E, dB.E, p)
    if not val > 0.0 or not np.isfinite(val):
        return -math.inf, [np.zeros_like(G) for G in Gs]
    f = math.log(val) - sigma * (dA.logZ + dB.logZ)
    ga = dA.pullback(gA / val) - sigma * dA.dlogZ
    gb = dB.pullback(gB / val) - sigma * dB.dlogZ
    if len(Gs) == 1:
        return f, [ga + gb]
    return f, [ga, gb]


@dataclass
class _LbfgsResult:
    Gs: list
    value: float
    iterations: int
    converged: bool


def _lbfgs_densities(fun, Gs0: list, cfg: OptimizerConfig, maximize: bool) -> _LbfgsResult:
    """Optimize ``fun(Gs) -> (value, grads)`` over Hermitian ``Gs`` with L-BFGS."""
    n = Gs0[0].shape[0]
    size = n * n
    sgn = -1.0 if maximize else 1.0

    def unpack(x):
        return [_vec_to_herm(x[i * size : (i + 1) * size], n) for i in range(len(Gs0))]

    def wrapped(x):
        f, grads = fun(unpack(x))
        if not np.isfinite(f):
            return 1e300, np.zeros_like(x)
        return sgn * f, sgn * np.concatenate([_herm_to_vec(g) for g in grads])

    x0 = np.concatenate([_herm_to_vec(hermitian(G)) for G in Gs0])
    res = minimize(
        wrapped,
        x0,
        jac=True,
        method="L-BFGS-B",
        options={"maxiter": cfg.max_iters, "ftol": cfg.tol * 1e-3, "gtol": 1e-10},
    )
    # an aborted line search at a point with a tiny gradient is a converged run
    converged = bool(res.success) or float(np.max(np.abs(res.jac), initial=0.0)) < 1e-6
    return _LbfgsResult(unpack(res.x), sgn * float(res.fun), int(res.nit), converged)


def _log_density(C: np.ndarray) -> np.ndarray:
    spec = eigh(C)
    w = np.maximum(spec.eigenvalues, spec.eigenvalues[0] * math.exp(-LOG_SPREAD))
    return (spec.eigenvectors * np.log(w)) @ spec.eigenvectors.conj().T


def _initial_density(Y: BipartiteOperator, ord: NormOrder, init) -> np.ndarray:
    if init is None:
        return heuristic_density(Y, ord)
    if isinstance(init, str):
        if init != "uniform":
            raise ValueError(f"unknown init {init!r}")
        return np.eye(Y.n, dtype=complex) / Y.n
    return np.asarray(init, dtype=complex)


# weight of the uniform density mixed into a start: the gradient in G vanishes
# on the boundary of the density set, so iterations must begin inside it
INTERIOR_MIX = 0.1


def _interior(C: np.ndarray) -> np.ndarray:
    n = C.shape[0]
    return (1.0 - INTERIOR_MIX) * hermitian(C) + INTERIOR_MIX * np.eye(n) / n


def nc_norm_psd(Y, ord: NormOrder, cfg: OptimizerConfig = DEFAULT_CONFIG, init=None) -> NormEstimate:
    """NC norm of a positive semidefinite operator for ``p <= q``.

    The objective is concave in the density ``C``; it is maximized over
    ``C = e^G / Tr e^G`` with L-BFGS. ``init`` may be a density matrix or
    ``"uniform"``; the default is ``heuristic_density``.
    """
    _require_pleq(ord)
    Y = _as_operator(Y)
    if min_eig(Y.matrix) < -1e-10 * max(1.0, float(np.max(np.abs(Y.matrix)))):
        raise DomainError("nc_norm_psd needs a positive semidefinite operator")
    if math.isinf(ord.r):
        v = schatten_norm(Y.matrix, ord.p)
        return NormEstimate.exact(v, np.eye(Y.n) / Y.n)
    _require_finite_p(ord)
    if not np.any(Y.matrix):
        return NormEstimate.exact(0.0, np.eye(Y.n) / Y.n)
    sigma = 1.0 / (2.0 * ord.r)
    C0 = _initial_density(Y, ord, init)
    res = _lbfgs_densities(
        lambda Gs: _log_scaled_norm(Y, Gs, sigma, ord.p), [_log_density(_interior(C0))], cfg, maximize=True
    )
    C = _exp_density(res.Gs[0], sigma).C
    lower = nc_objective(Y, C, ord)
    start = nc_objective(Y, C0, ord)
    if start > lower:
        lower, C = start, C0
    if res.converged:
        return NormEstimate(lower, lower, lower * (1 + 10 * cfg.tol), "converged", res.iterations, C)
    # psi bounds the norm from above whenever psi is defined and p <= 2
    upper = psi(Y, ord) if ord.p <= 2 and not math.isinf(ord.q) else math.inf
    return NormEstimate(lower, lower, max(upper, lower), "bracket-only", res.iterations, C)


def _starts(Y: BipartiteOperator, ord: NormOrder, cfg: OptimizerConfig) -> list:
    n = Y.n
    starts = [heuristic_density(Y, ord), np.eye(n, dtype=complex) / n]
    if Y.is_hermitian(1e-10):
        spec = eigh(Y.matrix)
        U, w = spec.eigenvectors, spec.eigenvalues
        for part in (np.maximum(w, 0.0), np.maximum(-w, 0.0)):
            if np.any(part > 0):
                P = Y.with_matrix((U * part) @ U.conj().T)
                starts.append(heuristic_density(P, ord))
    for k in range(len(starts), cfg.restarts):
        starts.append(_random_density(n, _restart_rng(cfg.seed, k)))
    return starts[: max(cfg.restarts, 1)]


def nc_norm_general_lower(
    Y, ord: NormOrder, cfg: OptimizerConfig = DEFAULT_CONFIG, extra_starts: Sequence = ()
) -> NormEstimate:
    """Multi-start lower bound on the NC norm of an arbitrary operator, ``p <= q``.

    Ascent runs over pairs of PSD scalings ``(A, B)`` of unit 2r-norm. Start ``k`` depends only on ``(cfg.seed, k)``, so more
    restarts never lower the result. The supremum is not known to be concave
    here, hence the infinite upper end.
    """
    _require_pleq(ord)
    Y = _as_operator(Y)
    if math.isinf(ord.r):
        return NormEstimate.exact(schatten_norm(Y.matrix, ord.p))
    _require_finite_p(ord)
    if not np.any(Y.matrix):
        return NormEstimate.exact(0.0)
    sigma = 1.0 / (2.0 * ord.r)
    best, best_pair, total = -math.inf, None, 0
    for C0 in list(_starts(Y, ord, cfg)) + list(extra_starts):
        G0 = _log_density(_interior(C0))
        res = _lbfgs_densities(
            lambda Gs: _log_scaled_norm(Y, Gs, sigma, ord.p), [G0, G0], cfg, maximize=True
        )
        total += res.iterations
        CA, CB = (_exp_density(G, sigma).C for G in res.Gs)
        value = _pair_value(Y, CA, CB, ord)
        if value > best:
            best, best_pair = value, (CA, CB)
    return NormEstimate(best, best, math.inf, "bracket-only", total, best_pair)


def _pair_value(Y: BipartiteOperator, CA: np.ndarray, CB: np.ndarray, ord: NormOrder) -> float:
    s = 1.0 / (2.0 * ord.r)
    LA = lift_outside(matrix_power(CA, s), Y.m)
    LB = lift_outside(matrix_power(CB, s), Y.m)
    return schatten_norm(LA @ Y.matrix @ LB, ord.p)


def nc_norm_diagonal(Y, ord: NormOrder) -> float:
    """Classical mixed norm of the diagonal entries, valid in both regimes."""
    Y = _as_operator(Y)
    if not Y.is_diagonal(1e-12):
        raise DomainError("nc_norm_diagonal needs an operator diagonal in the product basis")
    a = np.abs(np.diag(Y.matrix)).reshape(Y.n, Y.m)
    rows = a.max(axis=1) if math.isinf(ord.p) else np.sum(a**ord.p, axis=1) ** (1.0 / ord.p)
    if math.isinf(ord.q):
        return float(rows.max())
    return float(np.sum(rows**ord.q) ** (1.0 / ord.q))


def diagonal_witness(Y, ord: NormOrder) -> np.ndarray:
    """Diagonal ``A`` with ``||A||_2r = 1`` attaining the closed form for diagonal ``Y``.

    ``a_i = w_i^(q/2pr) (sum_i w_i^(q/p))^(-1/2r)`` with ``w_i = sum_j |y_ij|^p``.
    """
    Y = _as_operator(Y)
    a = np.abs(np.diag(Y.matrix)).reshape(Y.n, Y.m)
    w = np.sum(a**ord.p, axis=1)
    if math.isinf(ord.r):
        return np.eye(Y.n)
    s = ord.q / ord.p
    return np.diag(w ** (s / (2 * ord.r)) * np.sum(w**s) ** (-1.0 / (2 * ord.r)))


def _diagonal_dual(Y: BipartiteOperator, ord: NormOrder) -> Optional[np.ndarray]:
    """Diagonal ``W`` with unit dual mixed norm and ``Tr(Y_diag W)`` equal to
    the mixed norm of ``Y_diag``."""
    y = np.diag(Y.matrix).reshape(Y.n, Y.m)
    a = np.abs(y)
    p, q = ord.p, ord.q
    if math.isinf(p) or math.isinf(q):
        return None
    rho = np.sum(a**p, axis=1) ** (1.0 / p)
    N = float(np.sum(rho**q) ** (1.0 / q))
    if N == 0.0:
        return None
    phase = np.where(a > 0, np.conj(y) / np.where(a > 0, a, 1.0), 0.0)
    g = phase * a ** (p - 1.0) * (rho ** (q - p))[:, None] / N ** (q - 1.0)
    return np.diag(g.reshape(-1))


def operator_schmidt(Y: BipartiteOperator):
    """Operator-Schmidt decomposition ``Y = sum_k s_k E_k (x) F_k``."""
    n, m = Y.n, Y.m
    R = Y.matrix.reshape(n, m, n, m).transpose(0, 2, 1, 3).reshape(n * n, m * m)
    U, s, Vh = np.linalg.svd(R, full_matrices=False)
    E = [U[:, k].reshape(n, n) for k in range(s.size)]
    F = [Vh[k].reshape(m, m) for k in range(s.size)]
    return s, E, F


def product_factors(Y: BipartiteOperator, tol: float = 1e-10):
    """Return ``(Y1, Y2)`` if ``Y`` is numerically a product, else None."""
    s, E, F = operator_schmidt(Y)
    if s.size == 0 or s[0] == 0 or (s.size > 1 and s[1] > tol * s[0]):
        return None
    return s[0] * E[0], F[0]


def dual_norm_upper(W: np.ndarray, dims, dual_ord: NormOrder, cfg: OptimizerConfig, factors=None):
    """Upper estimate of ``||W||_NC`` for an order with ``p <= q``.

    Exact where a closed form applies (equal exponents, diagonal, product);
    otherwise ``||W||_NC <= sqrt(||W^*W|^(1/2)||_NC ||WW^*|^(1/2)||_NC)`` with
    each PSD factor bounded by the concave solver.
    """
    n, m = dims
    Wop = BipartiteOperator(n, m, W)
    if math.isinf(dual_ord.r):
        return schatten_norm(W, dual_ord.p)
    if factors is not None:
        W1, W2 = factors
        return schatten_norm(W1, dual_ord.q) * schatten_norm(W2, dual_ord.p)
    if Wop.is_diagonal(1e-14):
        return nc_norm_diagonal(Wop, dual_ord)
    if math.isinf(dual_ord.p):
        return math.inf
    pieces = []
    for M in (W.conj().T @ W, W @ W.conj().T):
        absW = Wop.with_matrix(matrix_power(hermitian(M), 0.5))
        pieces.append(nc_norm_psd(absW, dual_ord, cfg).upper)
    return math.sqrt(pieces[0] * pieces[1])


def _upper_from_density(Y: BipartiteOperator, C: np.ndarray, ord: NormOrder) -> float:
    K = lift_outside(matrix_power(C, -1.0 / (2.0 * ord.r)), Y.m)
    return schatten_norm(K @ Y.matrix @ K, ord.p)


def nc_norm_upper_qlep(Y, ord: NormOrder, cfg: OptimizerConfig = DEFAULT_CONFIG, init=None) -> NormEstimate:
    """Upper bound for ``q <= p`` from the best single-term factorization
    ``Y = (K (x) I) Z (K (x) I)`` with ``K = C^(1/2r)``, ``C > 0`` unit trace.

    ``Z`` is ``(C^(-1/2r) (x) I) Y (C^(-1/2r) (x) I)``; the cost is ``||Z||_p``.
    """
    _require_qlep(ord)
    Y = _as_operator(Y)
    n = Y.n
    uniform = np.eye(n, dtype=complex) / n
    if math.isinf(ord.r):
        v = schatten_norm(Y.matrix, ord.p)
        return NormEstimate(v, 0.0, v, "bracket-only", 0, uniform)
    _require_finite_p(ord)
    if not np.any(Y.matrix):
        return NormEstimate(0.0, 0.0, 0.0, "bracket-only", 0, uniform)
    sigma = -1.0 / (2.0 * ord.r)
    C0 = _initial_density(Y, ord, init)
    res = _lbfgs_densities(
        lambda Gs: _log_scaled_norm(Y, Gs, sigma, ord.p), [_log_density(_interior(C0))], cfg, maximize=False
    )
    candidates = [(_upper_from_density(Y, uniform, ord), uniform)]
    for C in (C0, _exp_density(res.Gs[0], sigma).C):
        try:
            candidates.append((_upper_from_density(Y, C, ord), C))
        except DomainError:
            pass
    value, Cbest = min(candidates, key=lambda c: c[0])
    K = matrix_power(Cbest, 1.0 / (2.0 * ord.r))
    Kinv = lift_outside(matrix_power(Cbest, -1.0 / (2.0 * ord.r)), Y.m)
    dec = Decomposition([(K, Kinv @ Y.matrix @ Kinv, K)], Y.m)
    return NormEstimate(value, 0.0, value, "bracket-only", res.iterations, dec)


def nc_norm_lower_qlep(
    Y, ord: NormOrder, cfg: OptimizerConfig = DEFAULT_CONFIG, upper: Optional[NormEstimate] = None
) -> NormEstimate:
    """Certified lower bound for ``q <= p`` by duality.

    For each candidate ``W`` the quotient ``|Tr(YW)| / U(W)`` is a lower bound
    whenever ``U(W)`` bounds ``||W||_NC:p',q'`` from above. Candidates are the
    Schatten dual of ``Y``, the diagonal dual of its diagonal part, the
    product dual of its leading operator-Schmidt term, and the dual pulled
    back through the best single-term factorization.
    """
    _require_qlep(ord)
    Y = _as_operator(Y)
    dual = make_order(ord.p_dual, ord.q_dual)
    dims = Y.dims
    if math.isinf(ord.r):
        v = schatten_norm(Y.matrix, ord.p)
        return NormEstimate(v, v, math.inf, "bracket-only", 0)
    _require_finite_p(ord)
    if not np.any(Y.matrix):
        return NormEstimate(0.0, 0.0, math.inf, "bracket-only", 0)

    candidates = []  # (W, factors)
    _, G = _schatten_dual(Y.matrix, ord.p)
    candidates.append((G, None))
    Wd = _diagonal_dual(Y, ord)
    if Wd is not None:
        candidates.append((Wd, None))
    s, E, F = operator_schmidt(Y)
    if s.size and s[0] > 0:
        Y1, Y2 = E[0], F[0]
        _, W1 = _schatten_dual(Y1, ord.q)
        _, W2 = _schatten_dual(Y2, ord.p)
        candidates.append((np.kron(W1, W2), (W1, W2)))
    if upper is None:
        upper = nc_norm_upper_qlep(Y, ord, cfg)
    if isinstance(upper.witness, Decomposition) and upper.witness.terms:
        K, Z, _ = upper.witness.terms[0]
        _, S = _schatten_dual(Z, ord.p)
        L = lift_outside(K, Y.m)
        Linv = np.linalg.inv(L)
        # Tr(Y W) = Tr(Z S) for W = L^-1 S L^-1 since Y = L Z L
        candidates.append((Linv @ S @ Linv, None))

    best, best_W = 0.0, None
    for W, factors in candidates:
        num = abs(np.trace(Y.matrix @ W))
        if num == 0.0:
            continue
        den = dual_norm_upper(W, dims, dual, cfg, factors)
        if den > 0 and np.isfinite(den) and num / den > best:
            best, best_W = num / den, W
    return NormEstimate(best, best, math.inf, "bracket-only", len(candidates), best_W)


def nc_norm(Y, ord: NormOrder, cfg: OptimizerConfig = DEFAULT_CONFIG) -> NormEstimate:
    """Route to the strongest available method for ``Y`` and ``(p, q)``."""
    Y = _as_operator(Y)
    if ord.p == ord.q:
        return NormEstimate.exact(schatten_norm(Y.matrix, ord.p))
    if Y.is_diagonal(1e-12):
        return NormEstimate.exact(nc_norm_diagonal(Y, ord), diagonal_witness(Y, ord))
    if ord.p <= ord.q:
        if Y.is_hermitian(1e-10) and min_eig(Y.matrix) >= -1e-10 * max(1.0, float(np.max(np.abs(Y.matrix)))):
            return nc_norm_psd(Y, ord, cfg)
        return nc_norm_general_lower(Y, ord, cfg)
    return nc_bracket_qlep(Y, ord, cfg)


def nc_bracket_qlep(Y, ord: NormOrder, cfg: OptimizerConfig = DEFAULT_CONFIG) -> NormEstimate:
    """Combine the single-term upper bound and the dual lower bound."""
    Y = _as_operator(Y)
    up = nc_norm_upper_qlep(Y, ord, cfg)
    lo = nc_norm_lower_qlep(Y, ord, cfg, upper=up)
    lower = lo.lower
    return NormEstimate(
        0.5 * (lower + up.upper), lower, up.upper, "bracket-only", up.iterations + lo.iterations, up.witness
    )
