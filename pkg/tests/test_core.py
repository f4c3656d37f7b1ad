import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import rand_herm, rand_psd
from ncnorm.core import (
    NormEstimate,
    OptimizerConfig,
    block_diag_inside,
    conjugate_exponent,
    diagonal_blocks_inside,
    make_order,
    offdiag_embed,
    psi,
    psi_gradient,
    triple_bar_norm,
)
from ncnorm.errors import DomainError, InvalidExponentError, RegimeError
from ncnorm.linalg import BipartiteOperator, make_rng, random_unitary, schatten_norm

seeds = st.integers(min_value=0, max_value=2**32 - 1)


# ---------------------------------------------------------------- exponents


def test_order_equal_exponents():
    assert math.isinf(make_order(2, 2).r)


def test_order_one_two():
    o = make_order(1, 2)
    assert o.r == 2 and math.isinf(o.p_dual) and o.q_dual == 2 and o.r_dual == 2


def test_order_two_four():
    assert make_order(2, 4).r == pytest.approx(4.0)


def test_order_symmetric_in_regime():
    assert make_order(4, 2).r == pytest.approx(4.0)
    assert make_order(4, 2).regime == "q<p"


def test_dual_order_has_same_r():
    for p, q in [(1.5, 3), (2, 4), (3, 1.5), (1.2, 7)]:
        o = make_order(p, q)
        assert o.dual().r == pytest.approx(o.r)


def test_order_rejects_small_exponent():
    with pytest.raises(InvalidExponentError):
        make_order(0.5, 2)


def test_conjugate_exponent():
    assert math.isinf(conjugate_exponent(1))
    assert conjugate_exponent(2) == 2
    assert conjugate_exponent(1.5) == pytest.approx(3.0)
    assert conjugate_exponent(math.inf) == 1.0
    with pytest.raises(InvalidExponentError):
        conjugate_exponent(0.9)


def test_estimate_exact():
    e = NormEstimate.exact(2.5)
    assert e.lower == e.upper == e.value and e.status == "closed-form" and e.width == 0


def test_config_validation():
    with pytest.raises(ValueError):
        OptimizerConfig(tol=0)
    with pytest.raises(ValueError):
        OptimizerConfig(restarts=0)


# ---------------------------------------------------------------- psi


@pytest.mark.parametrize("p,q", [(1, 2), (1.5, 3), (2, 2), (2, 1), (3, 1.5)])
def test_psi_product(p, q, rng):
    Y1, Y2 = rand_psd(rng, 3), rand_psd(rng, 2)
    o = make_order(p, q)
    assert psi(BipartiteOperator.product(Y1, Y2), o) == pytest.approx(
        schatten_norm(Y1, q) * schatten_norm(Y2, p), rel=1e-10
    )


def test_psi_identity():
    o = make_order(1.5, 3)
    assert psi(BipartiteOperator(3, 2, np.eye(6)), o) == pytest.approx(3 ** (1 / 3) * 2 ** (1 / 1.5))


def test_psi_loop_oracle(rng):
    # (Tr_1 (Tr_2 Y^p)^(q/p))^(1/q) assembled with scipy fractional powers
    from scipy.linalg import fractional_matrix_power

    n, m, p, q = 2, 3, 1.5, 2.5
    M = rand_psd(rng, n * m)
    Yp = fractional_matrix_power(M, p)
    T = np.einsum("ijkj->ik", Yp.reshape(n, m, n, m))
    expect = np.trace(fractional_matrix_power(T, q / p)).real ** (1 / q)
    assert psi(BipartiteOperator(n, m, M), make_order(p, q)) == pytest.approx(expect, rel=1e-9)


def test_psi_rejects_non_psd():
    with pytest.raises(DomainError):
        psi(BipartiteOperator(1, 2, np.diag([1.0, -1.0])), make_order(1, 2))


def test_psi_needs_finite_exponents():
    with pytest.raises(InvalidExponentError):
        psi(BipartiteOperator(1, 2, np.eye(2)), make_order(1, math.inf))


@settings(max_examples=30, deadline=None)
@given(seeds, st.floats(0.01, 100.0))
def test_psi_homogeneous(seed, c):
    Y = BipartiteOperator(2, 2, rand_psd(make_rng(seed), 4))
    o = make_order(1.5, 3)
    assert psi(Y.with_matrix(c * Y.matrix), o) == pytest.approx(c * psi(Y, o), rel=1e-10)


@settings(max_examples=30, deadline=None)
@given(seeds, st.sampled_from([(1, 2), (1.5, 3), (2, 1), (1.3, 1.3)]))
def test_psi_local_unitary_invariance(seed, pq):
    rng = make_rng(seed)
    Y = BipartiteOperator(2, 3, rand_psd(rng, 6))
    L = np.kron(random_unitary(2, rng), random_unitary(3, rng))
    o = make_order(*pq)
    assert psi(Y.with_matrix(L @ Y.matrix @ L.conj().T), o) == pytest.approx(psi(Y, o), rel=1e-9)


def test_psi_convexity_spot_check():
    rng = make_rng(99)
    orders = [make_order(p, q) for p, q in [(1, 1), (1.2, 3), (1.5, 1.2), (2, 4), (2, 1)]]
    for k in range(200):
        o = orders[k % len(orders)]
        Y = BipartiteOperator(2, 2, rand_psd(rng, 4))
        W = Y.with_matrix(rand_psd(rng, 4))
        mid = psi(Y.with_matrix(0.5 * (Y.matrix + W.matrix)), o)
        assert mid <= 0.5 * (psi(Y, o) + psi(W, o)) + 1e-9


# ---------------------------------------------------------------- gradient


def test_gradient_of_trace_is_identity(rng):
    Y = BipartiteOperator(2, 2, rand_psd(rng, 4))
    np.testing.assert_allclose(psi_gradient(Y, make_order(1, 1)), np.eye(4), atol=1e-12)


def test_gradient_diagonal_scalar_calculus():
    p, q = 1.5, 3.0
    y = np.array([[0.4, 1.3], [2.0, 0.7]])
    w = np.sum(y**p, axis=1)
    F = np.sum(w ** (q / p)) ** (1 / q)
    # dF/dy_ij = F^(1-q) w_i^(q/p - 1) y_ij^(p-1)
    expect = F ** (1 - q) * (w ** (q / p - 1))[:, None] * y ** (p - 1)
    G = psi_gradient(BipartiteOperator(2, 2, np.diag(y.reshape(-1))), make_order(p, q))
    np.testing.assert_allclose(np.diag(G).real, expect.reshape(-1), rtol=1e-10)
    assert np.max(np.abs(G - np.diag(np.diag(G)))) < 1e-12


@pytest.mark.parametrize("p,q", [(1.5, 3), (1.2, 1.2), (2, 1), (3, 2)])
def test_gradient_finite_differences(p, q, rng):
    Y = BipartiteOperator(2, 2, rand_psd(rng, 4, shift=0.2))
    o = make_order(p, q)
    G = psi_gradient(Y, o)
    eps = 1e-6
    for _ in range(5):
        D = rand_herm(rng, 4)
        fd = (psi(Y.with_matrix(Y.matrix + eps * D), o) - psi(Y.with_matrix(Y.matrix - eps * D), o)) / (2 * eps)
        assert np.real(np.trace(G @ D)) == pytest.approx(fd, rel=1e-4)


# ---------------------------------------------------------------- block embeddings


def test_block_diag_inside_layout(rng):
    Y0, Y1 = rand_psd(rng, 4), rand_psd(rng, 4)
    Z = block_diag_inside(Y0, Y1, 2, 2)
    assert Z.dims == (2, 4)
    B0, B1 = diagonal_blocks_inside(Z.matrix, 2, 2)
    np.testing.assert_allclose(B0, Y0)
    np.testing.assert_allclose(B1, Y1)
    # inside traces add: Tr_2 of the direct sum is Tr_2 Y0 + Tr_2 Y1
    o = make_order(1, 1)
    assert psi(Z, o) == pytest.approx(np.trace(Y0).real + np.trace(Y1).real)


def test_offdiag_embed_is_hermitian(rng):
    Y = BipartiteOperator(2, 2, rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)))
    X = offdiag_embed(Y)
    assert X.is_hermitian() and X.dims == (2, 4)
    w = np.linalg.eigvalsh(X.matrix)
    s = np.linalg.svd(Y.matrix, compute_uv=False)
    np.testing.assert_allclose(np.sort(w), np.sort(np.concatenate([s, -s])), atol=1e-12)


# ---------------------------------------------------------------- triple bar


def test_triple_bar_psd_bound(rng):
    o = make_order(1.5, 3)
    X = BipartiteOperator(2, 2, rand_psd(rng, 4))
    assert triple_bar_norm(X, o).upper <= psi(X, o) + 1e-9


def test_triple_bar_mirror_bound(rng):
    o = make_order(1.5, 3)
    N = rand_psd(rng, 4)
    X = BipartiteOperator(2, 2, -N)
    assert triple_bar_norm(X, o).upper <= psi(X.with_matrix(N), o) + 1e-9


def test_triple_bar_scalar_brute_force():
    # min over a - b = x, a, b >= 0 of |a| + |b| at p = q = 1, per diagonal entry
    X = BipartiteOperator(1, 2, np.diag([1.0, -1.0]))
    est = triple_bar_norm(X, make_order(1, 1))
    grid = np.linspace(0, 2, 2001)
    brute = sum(min(abs(x + a) + a for a in grid if x + a >= 0) for x in (1.0, -1.0))
    assert brute == pytest.approx(2.0)
    assert est.value == pytest.approx(2.0, abs=1e-7)


def test_triple_bar_regime():
    with pytest.raises(RegimeError):
        triple_bar_norm(BipartiteOperator(1, 2, np.eye(2)), make_order(3, 3))
    with pytest.raises(DomainError):
        triple_bar_norm(BipartiteOperator(1, 2, np.array([[0, 1], [0, 0]])), make_order(1, 1))
