import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coopest.matlin import (
    DimensionError,
    InconsistentSystemError,
    NonHermitianError,
    check_hermitian,
    herm_eig,
    kron,
    partial_trace,
    solve_anticommutator,
)
from conftest import random_density, random_hermitian

I2 = np.eye(2)
SX = np.array([[0, 1], [1, 0]], complex)
SY = np.array([[0, -1j], [1j, 0]])
SZ = np.diag([1.0, -1.0]).astype(complex)


def vec_oracle(a, b):
    """Minimum-norm least squares on (I (x) a + a^T (x) I) vec(x) = 2 vec(b)."""
    n = a.shape[0]
    big = np.kron(np.eye(n), a) + np.kron(a.T, np.eye(n))
    x, *_ = np.linalg.lstsq(big, 2 * b.reshape(-1, order="F"), rcond=None)
    return x.reshape(n, n, order="F")


def test_kron_identity_and_blocks():
    assert np.array_equal(kron(I2, I2), np.eye(4))
    a, b = 0.3, -1.7
    assert np.allclose(kron(np.diag([1, 0]), np.diag([a, b])), np.diag([a, b, 0, 0]))


def test_kron_matches_xx_generator_series():
    # exp(-i pi/4 XX) by brute-force series vs the closed Kronecker form
    h = -1j * (np.pi / 4) * kron(SX, SX)
    u, term = np.eye(4, dtype=complex), np.eye(4, dtype=complex)
    for k in range(1, 40):
        term = term @ h / k
        u = u + term
    expected = np.cos(np.pi / 4) * np.eye(4) - 1j * np.sin(np.pi / 4) * kron(SX, SX)
    assert np.allclose(u, expected, atol=1e-14)
    assert kron(SZ, SX)[0, 1] == 1 and kron(SZ, SX)[2, 3] == -1


def test_partial_trace_of_product(rng):
    a, b = random_hermitian(rng, 2), random_hermitian(rng, 3)
    m = kron(a, b)
    assert np.allclose(partial_trace(m, (2, 3), "B"), a * np.trace(b), atol=1e-12)
    assert np.allclose(partial_trace(m, (2, 3), "F"), b * np.trace(a), atol=1e-12)


def test_partial_trace_direct_summation(rng):
    m = random_density(rng, 4)
    pb = np.zeros((2, 2), complex)
    for i in range(2):
        for k in range(2):
            for j in range(2):
                pb[i, k] += m[2 * i + j, 2 * k + j]
    assert np.allclose(partial_trace(m, (2, 2), "B"), pb, atol=1e-15)
    assert np.isclose(np.trace(partial_trace(m, (2, 2), "F")), np.trace(m))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.floats(-3, 3), st.floats(-3, 3))
def test_partial_trace_linear_and_trace_preserving(seed, c1, c2):
    r = np.random.default_rng(seed)
    m1, m2 = random_hermitian(r, 6), random_hermitian(r, 6)
    for keep in ("B", "F"):
        lhs = partial_trace(c1 * m1 + c2 * m2, (2, 3), keep)
        rhs = c1 * partial_trace(m1, (2, 3), keep) + c2 * partial_trace(m2, (2, 3), keep)
        assert np.allclose(lhs, rhs, atol=1e-12)
        assert np.isclose(np.trace(partial_trace(m1, (2, 3), keep)), np.trace(m1), atol=1e-12)


def test_partial_trace_errors():
    with pytest.raises(DimensionError):
        partial_trace(np.eye(4), (2, 3), "B")
    with pytest.raises(ValueError):
        partial_trace(np.eye(4), (2, 2), "E")


def test_check_hermitian():
    assert check_hermitian(SY).is_hermitian
    rep = check_hermitian(np.array([[0, 1], [0, 0]]))
    assert not rep.is_hermitian and np.isclose(rep.max_asymmetry, np.sqrt(2))


def test_herm_eig_paulis_and_identity():
    d = herm_eig(SY)
    assert np.allclose(d.eigenvalues, [-1, 1])
    assert np.allclose(herm_eig(np.eye(3)).eigenvalues, 1)


def test_herm_eig_reconstruction_and_determinism(rng):
    for n in (2, 4):
        h = random_hermitian(rng, n)
        d = herm_eig(h)
        assert np.all(np.diff(d.eigenvalues) >= 0)
        assert np.linalg.norm(h - d.reconstruct()) <= 1e-10 * np.linalg.norm(h)
        q = d.eigenvectors
        assert np.allclose(q.conj().T @ q, np.eye(n), atol=1e-10)
        d2 = herm_eig(h.copy())
        assert np.array_equal(d.eigenvectors, d2.eigenvectors)
        # fixed phase: first non-negligible component real positive
        for col in q.T:
            k = np.argmax(np.abs(col) > 1e-12)
            assert abs(col[k].imag) < 1e-14 and col[k].real > 0


def test_herm_eig_psd_nonnegative(rng):
    for _ in range(20):
        rho = random_density(rng, 4, rank=2)
        assert herm_eig(rho).eigenvalues.min() >= -1e-10 * np.linalg.norm(rho)


def test_herm_eig_rejects_non_hermitian():
    with pytest.raises(NonHermitianError):
        herm_eig(np.array([[0, 1], [0, 0]]))


def test_anticommutator_identity_weight(rng):
    b = random_hermitian(rng, 3)
    x, deg, res = solve_anticommutator(np.eye(3), b)
    assert np.allclose(x, b) and not deg and res < 1e-14


def test_anticommutator_pdamp_half():
    # W0, W1 of the phase damping B output at gamma=1/2, phi=0
    pi = np.pi
    w0 = np.array([[0.5, 1 / pi], [1 / pi, 0.5]])
    w1 = np.array([[pi / 8, 0.5 - 1 / pi], [0.5 - 1 / pi, pi / 8]])
    x, deg, res = solve_anticommutator(w0, w1)
    diag = (16 - 8 * pi + pi ** 3) / (4 * (pi ** 2 - 4))
    off = (pi - 4) * pi / (2 * (pi ** 2 - 4))
    assert np.isclose(diag, 0.9316443646, atol=1e-10)
    assert np.isclose(off, -0.22972, atol=1e-5)
    assert np.allclose(x, [[diag, off], [off, diag]], atol=1e-12)
    assert not deg and res < 1e-14


@pytest.mark.parametrize("n", [2, 4])
def test_anticommutator_vs_vectorization(rng, n):
    for _ in range(100):
        a = random_hermitian(rng, n)
        a = a @ a + 0.1 * np.eye(n)
        b = random_hermitian(rng, n)
        x, deg, res = solve_anticommutator(a, b)
        assert not deg
        assert np.abs(x - vec_oracle(a, b)).max() <= 1e-8
        assert np.abs(x - x.conj().T).max() <= 1e-10
        assert res <= 1e-8 * np.linalg.norm(b)


def test_anticommutator_degenerate_min_norm():
    a = np.diag([0.0, 1.0])
    b = np.array([[0.0, 0.3], [0.3, 2.0]])
    x, deg, res = solve_anticommutator(a, b)
    assert deg and x[0, 0] == 0
    assert np.allclose(x, vec_oracle(a, b), atol=1e-12)
    assert res < 1e-12


def test_anticommutator_inconsistent():
    with pytest.raises(InconsistentSystemError):
        solve_anticommutator(np.diag([0.0, 1.0]), np.diag([1.0, 1.0]))


def test_anticommutator_rejects_bad_input():
    with pytest.raises(NonHermitianError):
        solve_anticommutator(np.array([[1, 1], [0, 1]]), np.eye(2))
    with pytest.raises(DimensionError):
        solve_anticommutator(np.eye(2), np.eye(3))
