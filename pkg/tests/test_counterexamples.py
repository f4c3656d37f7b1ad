import math

import numpy as np
import pytest
from scipy.special import zeta

from ncnorm.core import make_order, psi
from ncnorm.counterexamples import (
    SPLITTINGS,
    CounterexampleSpec,
    build_family,
    decreasing_points,
    default_grid,
    divergence_table,
    h_function,
    harmonic_lambda,
    is_monotone,
    nc_closed,
    nc_closed_witness,
    nonmono_derivative,
    nonmono_example,
    nonmono_scan,
    psi_closed,
    sign_unitaries,
)
from ncnorm.errors import DimensionError, DomainError, RegimeError
from ncnorm.linalg import matrix_power, partial_trace
from ncnorm.nc import nc_norm_psd, nc_objective


# ---------------------------------------------------------------- sign unitaries


def test_sign_unitaries_small():
    assert len(sign_unitaries(1)) == 2
    U = sign_unitaries(2)
    assert len(U) == 4
    np.testing.assert_array_equal(U[0], np.eye(2))


def test_sign_unitaries_average_is_dephasing():
    rng = np.random.default_rng(1)
    X = rng.standard_normal((3, 3))
    U = sign_unitaries(3)
    avg = sum(u @ X @ u for u in U) / len(U)
    np.testing.assert_allclose(avg, np.diag(np.diag(X)), atol=1e-14)


def test_sign_unitaries_closed_under_products():
    U = sign_unitaries(3)
    keys = {tuple(np.diag(u)) for u in U}
    for a in U:
        for b in U:
            assert tuple(np.diag(a @ b)) in keys


def test_sign_unitaries_bounds():
    with pytest.raises(DimensionError):
        sign_unitaries(0)


# ---------------------------------------------------------------- family


def test_spec_validation():
    with pytest.raises(DomainError):
        CounterexampleSpec(2, np.array([0.7, 0.7]))
    with pytest.raises(DimensionError):
        CounterexampleSpec(3, np.array([0.5, 0.5]))


def test_family_n1():
    Y = build_family(CounterexampleSpec(1, np.array([1.0])))
    assert Y.dims == (1, 2)
    np.testing.assert_allclose(Y.matrix, np.eye(2))


def test_family_blocks_are_projectors():
    # each block is a pure state, so Y^t = Y for every t > 0
    Y = build_family(harmonic_lambda(3))
    np.testing.assert_allclose(matrix_power(Y.matrix, 2.7), Y.matrix, atol=1e-12)


def test_family_inside_trace():
    spec = harmonic_lambda(2)
    T = partial_trace(build_family(spec), "inside")
    # sign averaging kills the off-diagonal part: Tr_2 Y = 2^n diag(lambda)
    np.testing.assert_allclose(T, 4 * np.diag(spec.lam), atol=1e-14)


def test_family_too_large():
    with pytest.raises(DimensionError):
        build_family(harmonic_lambda(6))


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("p,q", [(1, 2), (1.5, 3), (1.2, 1.8)])
def test_closed_forms_against_dense(n, p, q):
    spec = harmonic_lambda(n)
    o = make_order(p, q)
    Y = build_family(spec)
    assert psi_closed(spec, o) == pytest.approx(psi(Y, o), rel=1e-12)
    assert nc_objective(Y, nc_closed_witness(spec, o), o) == pytest.approx(nc_closed(spec, o), rel=1e-12)


def test_nc_closed_is_the_maximum():
    spec = harmonic_lambda(3)
    o = make_order(1.5, 3)
    est = nc_norm_psd(build_family(spec), o, init="uniform")
    assert est.value == pytest.approx(nc_closed(spec, o), rel=1e-6)


def test_uniform_lambda_psi():
    n, p, q = 4, 1.5, 3
    spec = CounterexampleSpec(n, np.full(n, 1 / n))
    assert psi_closed(spec, make_order(p, q)) == pytest.approx((2**n * n ** (p / q - 1)) ** (1 / p))


def test_ratio_one_at_p1_q2():
    # at n = 1 lambda = (1) and every vector norm of it is 1
    spec = CounterexampleSpec(1, np.array([1.0]))
    o = make_order(1, 2)
    assert psi_closed(spec, o) == pytest.approx(nc_closed(spec, o))


def test_closed_forms_regime():
    with pytest.raises(RegimeError):
        psi_closed(harmonic_lambda(2), make_order(2, 1))
    with pytest.raises(RegimeError):
        nc_closed(harmonic_lambda(2), make_order(2, 2))


def test_harmonic_lambda():
    np.testing.assert_allclose(harmonic_lambda(2).lam, [2 / 3, 1 / 3])
    assert harmonic_lambda(10).c <= 1 / math.log(10)
    with pytest.raises(DimensionError):
        harmonic_lambda(0)


# ---------------------------------------------------------------- h function


def test_h_at_two():
    assert h_function(2.0) == pytest.approx(math.sqrt(math.pi**2 / 6), rel=1e-14)


@pytest.mark.parametrize("t", [1.1, 1.5, 2.0, 3.0, 7.5])
def test_h_against_zeta(t):
    assert h_function(t) == pytest.approx(zeta(t) ** (1 / t), rel=1e-13)


def test_h_decreases_to_one():
    vals = [h_function(t) for t in (1.5, 2, 4, 8, 16, 32)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    assert vals[-1] == pytest.approx(1.0, abs=1e-8)


def test_h_brackets_harmonic_norms():
    # c <= ||lambda||_t <= c h(t) since lambda_j = c/j
    for n in (5, 50):
        spec = harmonic_lambda(n)
        for t in (1.5, 3.0):
            v = float(np.sum(spec.lam**t) ** (1 / t))
            assert spec.c <= v <= spec.c * h_function(t)


def test_h_domain():
    with pytest.raises(DomainError):
        h_function(1.0)


# ---------------------------------------------------------------- divergence table


def test_divergence_rows():
    o = make_order(1.5, 3)
    rows = divergence_table(o, 4, 24)
    assert [r.n for r in rows] == list(range(4, 25))
    assert is_monotone([r.ratio for r in rows], strict=True)
    assert all(r.holds(o) for r in rows)
    for r in rows:
        assert r.ratio == pytest.approx(r.psi / r.nc, rel=1e-12)
        assert r.cl_nc_lower is None


def test_divergence_p2_carries_cl_bound():
    rows = divergence_table(make_order(2, 4), 3, 6)
    for r in rows:
        assert r.cl_nc_lower == pytest.approx(r.ratio / math.sqrt(2))


def test_divergence_regime():
    with pytest.raises(RegimeError):
        divergence_table(make_order(3, 4), 2, 5)
    with pytest.raises(ValueError):
        divergence_table(make_order(1.5, 3), 5, 2)


def test_is_monotone():
    assert is_monotone([1, 2, 2])
    assert not is_monotone([1, 2, 2], strict=True)
    assert not is_monotone([2, 1])


# ---------------------------------------------------------------- non-monotone example


def test_example_spectra():
    W, Y = nonmono_example()
    w = 3 - math.sqrt(10)
    # W is the rank-one projection onto (w, 1) scaled by its squared length
    np.testing.assert_allclose(np.linalg.eigvalsh(W), [0, 0, 0, w * w + 1], atol=1e-14)
    np.testing.assert_allclose(np.linalg.eigvalsh(Y), [0, 0, 1, 1], atol=1e-14)


def test_default_grid():
    ps, qs = default_grid()
    assert ps[0] == 1.1 and ps[-1] == 1.9 and len(ps) == 9
    assert qs[0] == 1.1 and qs[-1] == 4.0 and len(qs) == 30


def test_scan_is_stable_and_finds_decrease():
    points = nonmono_scan([1.3, 1.5], [1.5, 3.0, 4.0])
    assert {pt.splitting for pt in points} == set(SPLITTINGS)
    found = decreasing_points(points)
    assert found and all(pt.splitting == "2x2-swapped" for pt in found)
    assert all(pt.stable for pt in found)


def test_four_by_one_is_monotone():
    # with a trivial inside factor psi is a Schatten norm, monotone on PSD matrices
    points = nonmono_scan([1.5], [2.0, 3.0], splittings=["4x1"])
    assert all(pt.derivative > 0 for pt in points)


def test_derivative_refines_downward():
    # Y + tW gains rank at t = 0, so the one-sided estimates converge slowly,
    # but they only move further below zero as the step shrinks
    o = make_order(1.3, 4)
    d = [nonmono_derivative(o, h, "2x2-swapped") for h in (1e-3, 1e-4, 1e-5, 1e-6)]
    assert d[0] < 0
    assert all(a > b for a, b in zip(d, d[1:]))


def test_scan_regime():
    with pytest.raises(RegimeError):
        nonmono_scan([2.5], [3.0])
