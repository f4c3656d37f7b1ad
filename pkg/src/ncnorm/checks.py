"""
Randomized property suites.

Every check compares ``lhs <= rhs + tol`` (or an equality within ``tol``)
and records a failure with the trial seed when it does not hold. Trial
``k`` of a run seeded with ``seed`` uses its own generator keyed by
``(seed, k)``, so reports are reproducible trial by trial.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .cl import cl_norm_hermitian, theorem1_constant
from .core import OptimizerConfig, make_order, psi, psi_gradient
from .counterexamples import decreasing_points, nonmono_scan
from .linalg import (
    BipartiteOperator,
    hermitian,
    lift_outside,
    matrix_power,
    random_unitary,
    schatten_norm,
)
from .nc import (
    diagonal_witness,
    nc_norm,
    nc_norm_diagonal,
    nc_norm_psd,
    nc_objective,
    nc_objective_gradient,
)

THREADS_ENV = "NCNORM_THREADS"


@dataclass
class Failure:
    seed: int
    description: str
    lhs: float
    rhs: float
    slack: float


@dataclass
class CheckReport:
    suite: str
    trials: int
    failures: list = field(default_factory=list)
    stats: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.failures

    def as_dict(self) -> dict:
        return {
            "suite": self.suite,
            "trials": self.trials,
            "failures": [
                {
                    "seed": f.seed,
                    "description": f.description,
                    "lhs": _num(f.lhs),
                    "rhs": _num(f.rhs),
                    "slack": _num(f.slack),
                }
                for f in self.failures
            ],
            "passed": self.passed,
            **({"stats": {k: _num(v) for k, v in self.stats.items()}} if self.stats else {}),
        }


def _num(x):
    x = float(x)
    if not math.isfinite(x):
        return str(x)
    return float(f"{x:.12g}")


def thread_count() -> int:
    """Worker count from ``NCNORM_THREADS`` (default 1)."""
    raw = os.environ.get(THREADS_ENV, "").strip()
    if not raw:
        return 1
    try:
        k = int(raw)
    except ValueError:
        raise ValueError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if k < 1:
        raise ValueError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return k


def trial_seed(seed: int, k: int) -> int:
    return int(np.random.SeedSequence([int(seed), int(k)]).generate_state(1)[0])


def _rng(s: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(s))


class _Recorder:
    def __init__(self, seed: int):
        self.seed = seed
        self.failures: list = []
        self.stats: dict = {}

    def leq(self, desc: str, lhs: float, rhs: float, tol: float):
        slack = rhs - lhs
        if not slack >= -tol:
            self.failures.append(Failure(self.seed, desc, lhs, rhs, slack))

    def close(self, desc: str, a: float, b: float, rtol: float):
        err = abs(a - b)
        bound = rtol * max(abs(b), 1e-300)
        if not err <= bound:
            self.failures.append(Failure(self.seed, desc, a, b, bound - err))

    def stat_max(self, key: str, value: float):
        self.stats[key] = max(self.stats.get(key, 0.0), value)


def _run(suite: str, trials: int, seed: int, body: Callable[[_Recorder, np.random.Generator, int], None]):
    if trials < 1:
        raise ValueError("trials must be at least 1")

    def one(k):
        s = trial_seed(seed, k)
        rec = _Recorder(s)
        body(rec, _rng(s), k)
        return rec

    workers = thread_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            recs = list(pool.map(one, range(trials)))
    else:
        recs = [one(k) for k in range(trials)]
    report = CheckReport(suite, trials)
    for rec in recs:
        report.failures.extend(rec.failures)
        for key, v in rec.stats.items():
            report.stats[key] = max(report.stats.get(key, 0.0), v)
    return report


def _ginibre(rng, d):
    return rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))


def _psd(rng, d):
    G = _ginibre(rng, d)
    return hermitian(G.conj().T @ G)


def _density(rng, d):
    C = _psd(rng, d)
    return C / np.trace(C).real


def _diag_op(rng, n, m, signed=False):
    v = rng.standard_normal(n * m)
    if not signed:
        v = v**2
    return BipartiteOperator(n, m, np.diag(v).astype(complex))


# --------------------------------------------------------------------- suites

LEMMA1_ORDERS = [(1.0, 2.0), (1.5, 3.0), (2.0, 4.0), (2.0, 1.0), (3.0, 1.5), (1.5, 1.5)]


def _lemma1(rec: _Recorder, rng, k):
    p, q = LEMMA1_ORDERS[k % len(LEMMA1_ORDERS)]
    ord = make_order(p, q)
    Y = _diag_op(rng, 3, 3, signed=True)
    W = _diag_op(rng, 3, 3, signed=True)
    nY, nW = nc_norm_diagonal(Y, ord), nc_norm_diagonal(W, ord)
    rec.leq("triangle on diagonals", nc_norm_diagonal(Y.with_matrix(Y.matrix + W.matrix), ord), nY + nW, 1e-9)
    dual = ord.dual()
    tr = abs(np.trace(Y.matrix @ W.matrix))
    rec.leq("Hoelder on diagonals", tr, nY * nc_norm_diagonal(W, dual), 1e-9)
    # Schatten reduction at p = q
    M = BipartiteOperator(3, 2, _ginibre(rng, 6))
    eq = make_order(p, p)
    rec.close("p = q reduces to Schatten", nc_norm(M, eq).value, schatten_norm(M.matrix, p), 1e-8)
    # product form
    Y1, Y2 = _psd(rng, 3), _psd(rng, 2)
    P = BipartiteOperator.product(Y1, Y2)
    est = nc_norm(P, ord)
    exact = schatten_norm(Y1, q) * schatten_norm(Y2, p)
    rec.close("product form", est.value, exact, 1e-4)
    # unitary scaling invariance of the sup quotient
    A, B = _ginibre(rng, 3), _ginibre(rng, 3)
    U = random_unitary(3, rng)
    Z = _ginibre(rng, 6)
    f1 = schatten_norm(lift_outside(A, 2) @ Z @ lift_outside(B, 2), p)
    f2 = schatten_norm(lift_outside(U @ A, 2) @ Z @ lift_outside(B, 2), p)
    rec.close("unitary invariance of the scaling quotient", f2, f1, 1e-10)


def _equality_witness(rec: _Recorder, rng, k):
    """Duality is attained on diagonals at ``(1.5, 3)``."""
    ord = make_order(1.5, 3.0)
    Y = _diag_op(rng, 3, 3)
    A = diagonal_witness(Y, ord)
    val = schatten_norm(lift_outside(A, 3) @ Y.matrix @ lift_outside(A, 3), ord.p)
    rec.close("diagonal witness attains the norm", val, nc_norm_diagonal(Y, ord), 1e-6)


THM1_ORDERS = [(1.0, 2.0), (1.5, 3.0), (2.0, 4.0)]


def _thm1(rec: _Recorder, rng, k):
    which = k % 3
    cfg = OptimizerConfig()
    if which == 0:
        ord = make_order(*THM1_ORDERS[(k // 3) % 3])
        Y = BipartiteOperator(3, 3, _psd(rng, 9))
        rec.leq("nc <= psi", nc_norm_psd(Y, ord, cfg).lower, psi(Y, ord), 1e-8)
    elif which == 1:
        ord = make_order(*THM1_ORDERS[(k // 3) % 3])
        Y = BipartiteOperator.product(_psd(rng, 3), _psd(rng, 3))
        rec.close("nc = psi on products", nc_norm_psd(Y, ord, cfg).value, psi(Y, ord), 1e-5)
    else:
        p = (1.0, 1.5, 2.0)[(k // 3) % 3]
        q = p if (k // 9) % 2 == 0 else 2 * p
        ord = make_order(p, q)
        Y = BipartiteOperator(2, 2, hermitian(_ginibre(rng, 4)))
        lower = nc_norm(Y, ord, cfg).lower
        cl = cl_norm_hermitian(Y, ord, cfg).upper
        rec.leq("nc <= 2^(3-1/p) cl", lower, theorem1_constant(ord) * cl, 1e-6)


LT_PS = (1.2, 1.7, 2.0)


def _lieb_thirring(rec: _Recorder, rng, k):
    p = LT_PS[k % 3]
    n, m = int(rng.integers(1, 5)), int(rng.integers(1, 4))
    q = p * (1.0 + 3.0 * rng.random()) + 1e-3
    ord = make_order(p, q)
    Y = _psd(rng, n * m)
    B = _density(rng, n)
    s = 1.0 / (2.0 * ord.r)
    K = lift_outside(matrix_power(B, s), m)
    Kp = lift_outside(matrix_power(B, p * s), m)
    lhs = schatten_norm(K @ Y @ K, p) ** p
    rhs = np.trace(Kp @ matrix_power(Y, p) @ Kp).real
    rec.leq("Lieb-Thirring", lhs, rhs, 1e-9 * max(1.0, abs(rhs)))


GRAD_ORDERS = [(1.5, 3.0), (1.0, 2.0), (2.0, 4.0), (1.2, 1.7)]
FD_EPS = 1e-6


def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-12)


def _gradients(rec: _Recorder, rng, k):
    ord = make_order(*GRAD_ORDERS[k % len(GRAD_ORDERS)])
    Y = BipartiteOperator(3, 2, _psd(rng, 6) + 0.1 * np.eye(6))
    G = psi_gradient(Y, ord)
    C = _density(rng, 3) + 0.05 * np.eye(3)
    C = C / np.trace(C).real
    Gc = nc_objective_gradient(Y, C, ord)
    worst = 0.0
    for _ in range(3):
        D = hermitian(_ginibre(rng, 6))
        D /= schatten_norm(D, 2)
        h = FD_EPS * schatten_norm(Y.matrix, math.inf)
        fd = (psi(Y.with_matrix(Y.matrix + h * D), ord) - psi(Y.with_matrix(Y.matrix - h * D), ord)) / (2 * h)
        an = np.real(np.trace(G @ D))
        worst = max(worst, _rel(an, fd))
        E = hermitian(_ginibre(rng, 3))
        E /= schatten_norm(E, 2)
        h = FD_EPS
        fd = (nc_objective(Y, C + h * E, ord) - nc_objective(Y, C - h * E, ord)) / (2 * h)
        an = np.real(np.trace(Gc @ E))
        worst = max(worst, _rel(an, fd))
    rec.stat_max("max_rel_error", worst)
    rec.leq("gradient vs central differences (relative error)", worst, 1e-4, 0.0)


def _posbound(rec: _Recorder, rng, k):
    q = (2.0, 3.0, 4.0)[k % 3]
    ord = make_order(2.0, q)
    Y = BipartiteOperator(2, 2, _psd(rng, 4))
    cl = cl_norm_hermitian(Y, ord).upper
    rec.leq("cl >= psi / sqrt 2", psi(Y, ord) / math.sqrt(2.0), cl, 1e-6)


def run_nonmono(trials=None, seed=0) -> CheckReport:
    """Grid scan for a decreasing direction of psi; ``trials`` is the grid size."""
    points = nonmono_scan()
    found = decreasing_points(points)
    report = CheckReport("nonmono", len(points))
    if found:
        best = min(found, key=lambda pt: pt.derivative)
        report.stats = {"decreasing_points": len(found), "min_derivative": best.derivative,
                        "p": best.p, "q": best.q}
    else:
        worst = min(points, key=lambda pt: pt.derivative)
        report.failures.append(
            Failure(int(seed), "no grid point with a stable negative derivative",
                    worst.derivative, -1e-6, -1e-6 - worst.derivative)
        )
    return report


def _suite(name, body, extra=None):
    def run(trials: int, seed: int) -> CheckReport:
        report = _run(name, trials, seed, body)
        if extra is not None:
            more = _run(name, trials, seed + 1, extra)
            report.failures.extend(more.failures)
        return report

    return run


SUITES = {
    "lemma1": _suite("lemma1", _lemma1, _equality_witness),
    "thm1": _suite("thm1", _thm1),
    "lieb-thirring": _suite("lieb-thirring", _lieb_thirring),
    "gradients": _suite("gradients", _gradients),
    "posbound": _suite("posbound", _posbound),
    "nonmono": run_nonmono,
}

DEFAULT_TRIALS = {
    "lemma1": 50,
    "thm1": 60,
    "lieb-thirring": 200,
    "gradients": 50,
    "posbound": 50,
    "nonmono": None,
}


def run_suite(name: str, trials=None, seed: int = 0) -> CheckReport:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    if trials is None:
        trials = DEFAULT_TRIALS[name]
    return SUITES[name](trials, seed)
