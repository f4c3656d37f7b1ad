import numpy as np
import pytest

from ncnorm.linalg import BipartiteOperator, hermitian

# (criterion, title, passed, seconds, detail) rows filled by test_acceptance
ACCEPTANCE = []


def ginibre(rng, d):
    return rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))


def rand_psd(rng, d, shift=0.0):
    G = ginibre(rng, d)
    return hermitian(G.conj().T @ G) + shift * np.eye(d)


def rand_herm(rng, d):
    return hermitian(ginibre(rng, d))


def rand_density(rng, d):
    C = rand_psd(rng, d)
    return C / np.trace(C).real


def op(M, n, m):
    return BipartiteOperator(n, m, M)


def svd_schatten(M, p):
    """Oracle Schatten norm from the eigenvalues of M^* M."""
    s = np.sqrt(np.clip(np.linalg.eigvalsh(M.conj().T @ M), 0, None))
    if np.isinf(p):
        return float(s.max())
    return float(np.sum(s**p) ** (1 / p))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def acceptance():
    return ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num, title, passed, secs, detail in sorted(ACCEPTANCE, key=lambda r: r[0]):
        mark = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {num:2d} {mark}  {title}  ({secs:.2f} s) {detail}")
