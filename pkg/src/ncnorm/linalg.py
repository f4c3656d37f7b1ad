"""
Dense Hermitian linear algebra on bipartite matrix spaces.

Everything here works on plain complex ``numpy`` arrays. A bipartite
operator on ``C^n (x) C^m`` uses the row index ``i*m + j`` with ``i`` the
outside factor and ``j`` the inside factor, which is exactly the layout
produced by ``numpy.kron(A, B)`` for ``A`` of size n and ``B`` of size m.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import (
    DimensionError,
    DomainError,
    InvalidExponentError,
    ProjectionError,
    SingularityError,
    SolverFailure,
)

CLIP_RTOL = 1e-12
DEGENERATE_RTOL = 1e-8
FEASIBILITY_TOL = 1e-9


def hermitian(M) -> np.ndarray:
    """Return the Hermitian part ``(M + M^*)/2`` as a complex array."""
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {M.shape}")
    return 0.5 * (M + M.conj().T)


def is_hermitian(M, tol: float = 1e-12) -> bool:
    M = np.asarray(M)
    scale = max(1.0, float(np.max(np.abs(M)))) if M.size else 1.0
    return bool(np.max(np.abs(M - M.conj().T), initial=0.0) <= tol * scale)


@dataclass(frozen=True)
class BipartiteOperator:
    """A matrix on ``C^n (x) C^m`` with declared factor dimensions.

    ``n`` is the outside dimension and ``m`` the inside dimension.
    """

    n: int
    m: int
    matrix: np.ndarray

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise DimensionError("factor dimensions must be positive")
        M = np.asarray(self.matrix, dtype=complex)
        if M.shape != (self.n * self.m, self.n * self.m):
            raise DimensionError(
                f"matrix shape {M.shape} does not match dims {self.n}x{self.m}"
            )
        object.__setattr__(self, "matrix", M)

    @property
    def dim(self) -> int:
        return self.n * self.m

    @property
    def dims(self) -> tuple[int, int]:
        return self.n, self.m

    def with_matrix(self, M) -> "BipartiteOperator":
        return BipartiteOperator(self.n, self.m, M)

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return is_hermitian(self.matrix, tol)

    def is_diagonal(self, tol: float = 1e-12) -> bool:
        off = self.matrix - np.diag(np.diag(self.matrix))
        return bool(np.max(np.abs(off), initial=0.0) < tol)

    def swapped(self) -> "BipartiteOperator":
        """The same operator with the roles of the two factors exchanged."""
        n, m = self.n, self.m
        M = self.matrix.reshape(n, m, n, m).transpose(1, 0, 3, 2)
        return BipartiteOperator(m, n, M.reshape(n * m, n * m))

    @classmethod
    def product(cls, A, B) -> "BipartiteOperator":
        A = np.atleast_2d(np.asarray(A, dtype=complex))
        B = np.atleast_2d(np.asarray(B, dtype=complex))
        return cls(A.shape[0], B.shape[0], np.kron(A, B))


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues in descending order and the matching unitary columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        U = self.eigenvectors
        return (U * self.eigenvalues) @ U.conj().T


def eigh(H) -> Spectrum:
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending."""
    H = hermitian(H)
    try:
        w, U = np.linalg.eigh(H)
    except np.linalg.LinAlgError as exc:
        raise SolverFailure(f"eigendecomposition did not converge: {exc}") from exc
    return Spectrum(w[::-1].copy(), U[:, ::-1].copy())


def _clip_threshold(w: np.ndarray) -> float:
    return CLIP_RTOL * float(np.max(np.abs(w), initial=0.0))


def _is_integer(s: float) -> bool:
    return float(s).is_integer()


def _powered_spectrum(w: np.ndarray, s: float) -> np.ndarray:
    """Apply ``x -> x**s`` to an eigenvalue vector under the clipping rules."""
    if _is_integer(s) and s >= 0:
        return w ** int(s)
    thr = _clip_threshold(w)
    if np.min(w, initial=0.0) < -thr:
        raise DomainError(
            f"eigenvalue {np.min(w):.3e} is negative; power {s} undefined"
        )
    w = np.where(w < thr, 0.0, w)
    if s < 0:
        if np.any(w == 0.0):
            raise SingularityError(f"zero eigenvalue with negative power {s}")
        return w**s
    with np.errstate(divide="ignore"):
        return np.where(w == 0.0, 0.0 if s > 0 else 1.0, w ** float(s))


def matrix_power(H, s: float) -> np.ndarray:
    """Fractional power of a Hermitian matrix through its spectrum.

    Eigenvalues within ``1e-12 * max|eig|`` of zero are treated as zero, and
    small negative ones are clipped. Integer powers ``s >= 0`` are allowed on
    indefinite matrices.
    """
    spec = eigh(H)
    U = spec.eigenvectors
    return (U * _powered_spectrum(spec.eigenvalues, s)) @ U.conj().T


def spectral_apply(H, f) -> np.ndarray:
    """Return ``U f(diag) U^*`` for a vectorized scalar function ``f``."""
    spec = eigh(H)
    U = spec.eigenvectors
    return (U * f(spec.eigenvalues)) @ U.conj().T


def schatten_norm(M, p: float) -> float:
    """Schatten p-norm, the l^p norm of the singular values, for ``p >= 1``."""
    if not p >= 1:
        raise InvalidExponentError(f"Schatten norm needs p >= 1, got {p}")
    M = np.asarray(M, dtype=complex)
    if M.size == 0:
        return 0.0
    try:
        sv = np.linalg.svd(M, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise SolverFailure(f"SVD did not converge: {exc}") from exc
    top = float(sv[0]) if sv.size else 0.0
    if np.isinf(p):
        return top
    if top == 0.0:
        return 0.0
    # scale first so sv**p cannot overflow
    return top * float(np.sum((sv / top) ** p)) ** (1.0 / p)


def partial_trace(
    Y: BipartiteOperator, which: Literal["inside", "outside"] = "inside"
) -> np.ndarray:
    """Trace out one factor of a bipartite operator.

    ``which="inside"`` returns the n x n matrix ``Tr_2 Y`` and
    ``which="outside"`` returns the m x m matrix ``Tr_1 Y``.
    """
    T = Y.matrix.reshape(Y.n, Y.m, Y.n, Y.m)
    if which == "inside":
        return np.einsum("ijkj->ik", T)
    if which == "outside":
        return np.einsum("ijil->jl", T)
    raise ValueError(f"which must be 'inside' or 'outside', not {which!r}")


def kron(A, B) -> np.ndarray:
    return np.kron(np.asarray(A, dtype=complex), np.asarray(B, dtype=complex))


def lift_outside(A, m: int) -> np.ndarray:
    """``A (x) I_m``."""
    return kron(A, np.eye(m))


def psd_project(H) -> np.ndarray:
    """Nearest positive semidefinite matrix in Frobenius distance."""
    return spectral_apply(H, lambda w: np.maximum(w, 0.0))


def min_eig(H) -> float:
    return float(np.linalg.eigvalsh(hermitian(H))[0])


def project_feasible_cl(H, Y, iters: int = 500) -> np.ndarray:
    """Project ``H`` onto ``{A >= 0} & {A >= -Y}`` by Dykstra's algorithm.

    The returned matrix satisfies both constraints to within ``1e-9`` in the
    minimum eigenvalue. A residual infeasibility below ``1e-6`` relative after
    ``iters`` sweeps is repaired by a scalar shift ``c*I`` (which moves
    toward both cones at once); anything larger raises ``ProjectionError``.
    """
    H = hermitian(H)
    Y = hermitian(Y)
    scale = max(1.0, float(np.max(np.abs(H))), float(np.max(np.abs(Y))))

    def infeasibility(X):
        return max(0.0, -min_eig(X), -min_eig(X + Y))

    if infeasibility(H) <= FEASIBILITY_TOL * 1e-3:
        return H

    x = H
    p_inc = np.zeros_like(H)
    q_inc = np.zeros_like(H)
    for _ in range(iters):
        y = psd_project(x + p_inc)
        p_inc = x + p_inc - y
        x_new = psd_project(y + q_inc + Y) - Y
        q_inc = y + q_inc - x_new
        step = float(np.linalg.norm(x_new - x))
        x = x_new
        if step <= 1e-13 * scale and infeasibility(x) <= FEASIBILITY_TOL * 1e-1:
            break

    gap = infeasibility(x)
    if gap > 1e-6 * scale:
        raise ProjectionError(
            f"projection still infeasible by {gap:.3e} after {iters} sweeps"
        )
    if gap > 0.0:
        x = x + (gap + FEASIBILITY_TOL * 1e-2) * np.eye(x.shape[0])
    return x


def divided_differences(w: np.ndarray, s: float) -> np.ndarray:
    """First divided differences of ``x -> x**s`` on the eigenvalues ``w``."""
    w = np.asarray(w, dtype=float)
    fw = _powered_spectrum(w, s)
    li, lk = w[:, None], w[None, :]
    diff = li - lk
    close = np.abs(diff) < DEGENERATE_RTOL * np.maximum(1.0, np.abs(li))
    mid = 0.5 * (li + lk)
    if s == 1:
        deriv = np.ones_like(mid)
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            deriv = s * np.where(mid > 0, mid, 0.0) ** (s - 1)
        if _is_integer(s) and s >= 1:
            deriv = s * mid ** int(s - 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        quot = (fw[:, None] - fw[None, :]) / np.where(close, 1.0, diff)
    return np.where(close, deriv, quot)


def frechet_power(H, s: float, delta) -> np.ndarray:
    """Directional derivative of ``X -> X**s`` at ``H`` along ``delta``.

    Uses the Daleckii-Krein formula in the eigenbasis of ``H``.
    """
    spec = eigh(H)
    U = spec.eigenvectors
    G = divided_differences(spec.eigenvalues, s)
    D = U.conj().T @ np.asarray(delta, dtype=complex) @ U
    return U @ (G * D) @ U.conj().T


def frechet_spectral(H, f, df, delta) -> np.ndarray:
    """Daleckii-Krein derivative of the spectral function ``f`` at ``H``.

    ``f`` and its derivative ``df`` must be vectorized scalar functions
    defined on the whole spectrum of ``H``.
    """
    spec = eigh(H)
    w, U = spec.eigenvalues, spec.eigenvectors
    li, lk = w[:, None], w[None, :]
    diff = li - lk
    close = np.abs(diff) < DEGENERATE_RTOL * np.maximum(1.0, np.abs(li))
    fw = f(w)
    quot = (fw[:, None] - fw[None, :]) / np.where(close, 1.0, diff)
    G = np.where(close, df(0.5 * (li + lk)), quot)
    D = U.conj().T @ np.asarray(delta, dtype=complex) @ U
    return U @ (G * D) @ U.conj().T


def project_spectrum_simplex(v, total: float = 1.0) -> np.ndarray:
    """Euclidean projection of a real vector onto ``{x >= 0, sum x = total}``."""
    v = np.asarray(v, dtype=float)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - total
    idx = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / idx > 0)[0][-1]
    theta = css[rho] / (rho + 1)
    return np.maximum(v - theta, 0.0)


def project_density(H, floor: float = 0.0) -> np.ndarray:
    """Frobenius projection onto unit-trace PSD matrices with eigenvalues >= floor."""
    spec = eigh(H)
    n = spec.eigenvalues.size
    lam = floor + project_spectrum_simplex(spec.eigenvalues - floor, 1.0 - n * floor)
    U = spec.eigenvectors
    return (U * lam) @ U.conj().T


InstanceKind = Literal["hermitian", "psd", "density", "diagonal-psd", "unitary-sign"]
INSTANCE_KINDS = ("hermitian", "psd", "density", "diagonal-psd", "unitary-sign")


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator so independent streams can be keyed by seed."""
    return np.random.Generator(np.random.Philox(int(seed)))


def _ginibre(rng: np.random.Generator, d: int) -> np.ndarray:
    return rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR with phase correction."""
    Q, R = np.linalg.qr(_ginibre(rng, d))
    ph = np.diag(R) / np.abs(np.diag(R))
    return Q * ph


def random_instances(kind: str, n: int, m: int, seed: int) -> BipartiteOperator:
    """Deterministic random test matrix on ``C^n (x) C^m``."""
    if kind not in INSTANCE_KINDS:
        raise ValueError(f"unknown instance kind {kind!r}; choose from {INSTANCE_KINDS}")
    rng = make_rng(seed)
    d = n * m
    if kind == "hermitian":
        M = hermitian(_ginibre(rng, d))
    elif kind in ("psd", "density"):
        G = _ginibre(rng, d)
        M = hermitian(G.conj().T @ G)
        if kind == "density":
            M = M / np.trace(M).real
    elif kind == "diagonal-psd":
        M = np.diag(rng.standard_normal(d) ** 2).astype(complex)
    else:
        M = np.diag(rng.choice([-1.0, 1.0], size=d)).astype(complex)
    return BipartiteOperator(n, m, M)
