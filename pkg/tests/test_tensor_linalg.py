import numpy as np
import pytest
from hypothesis import given, strategies as st

from oul import tensor_linalg as tl
from oul.errors import NearSingularPivot, NonDiagonalizable, NonFinite, NotSymmetric, Unstable

from conftest import spd_matrix, stable_matrix

seeds = st.integers(0, 2**32 - 1)


def test_eigendecompose_identity():
    eig = tl.eigendecompose(np.eye(2))
    np.testing.assert_array_equal(eig.values, [1.0, 1.0])
    np.testing.assert_allclose(eig.right_vectors, np.eye(2))


def test_eigendecompose_rotation_generator_sorted():
    eig = tl.eigendecompose(np.array([[0.0, 1.0], [-1.0, 0.0]]))
    np.testing.assert_allclose(eig.values, [-1j, 1j], atol=1e-15)


def test_eigendecompose_rejects_jordan_block():
    with pytest.raises(NonDiagonalizable):
        tl.eigendecompose(np.array([[1.0, 1.0], [0.0, 1.0]]))


def test_eigendecompose_rejects_nan():
    with pytest.raises(NonFinite):
        tl.eigendecompose(np.array([[np.nan]]))


@given(seeds, st.integers(1, 6), st.booleans())
def test_eigendecompose_residual(seed, n, complex_entries):
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(n, n))
    if complex_entries:
        m = m + 1j * rng.normal(size=(n, n))
    eig = tl.eigendecompose(m)
    resid = np.max(np.abs(m @ eig.right_vectors - eig.right_vectors * eig.values))
    assert resid <= 1e-10 * np.max(np.abs(m))
    key = np.lexsort((eig.values.imag, eig.values.real))
    np.testing.assert_array_equal(key, np.arange(n))
    np.testing.assert_allclose(eig.inverse_vectors @ eig.right_vectors, np.eye(n), atol=1e-8)


def test_lyapunov_scalar():
    np.testing.assert_allclose(tl.solve_lyapunov(np.array([[2.0]]), np.array([[1.0]])), [[0.5]])


def test_lyapunov_identity_drift_returns_diffusion(rng):
    d = spd_matrix(rng, 4)
    np.testing.assert_allclose(tl.solve_lyapunov(np.eye(4), d), d, atol=1e-14)


def test_lyapunov_complex_symmetric_optical():
    beta = np.eye(2, dtype=complex)
    d = np.array([[0, 1.2], [1.2, 0]], dtype=complex)
    np.testing.assert_allclose(tl.solve_lyapunov(beta, d), [[0, 1.2], [1.2, 0]], atol=1e-14)


def test_lyapunov_rejects_unstable():
    with pytest.raises(Unstable):
        tl.solve_lyapunov(np.array([[1.0, 0.0], [0.0, -0.5]]), np.eye(2))
    with pytest.raises(Unstable):
        tl.solve_lyapunov(np.array([[0.0, 1.0], [-1.0, 0.0]]), np.eye(2))


def test_lyapunov_rejects_asymmetric_diffusion():
    with pytest.raises(NotSymmetric):
        tl.solve_lyapunov(np.eye(2), np.array([[1.0, 0.1], [0.0, 1.0]]))


def test_lyapunov_accepts_defective_stable_drift():
    beta = np.array([[1.0, 1.0], [0.0, 1.0]])
    s = tl.solve_lyapunov(beta, np.eye(2))
    np.testing.assert_allclose(beta @ s + s @ beta.T, 2 * np.eye(2), atol=1e-13)


@given(seeds, st.integers(1, 6))
def test_lyapunov_residual(seed, n):
    rng = np.random.default_rng(seed)
    beta = stable_matrix(rng, n)
    d = spd_matrix(rng, n)
    s = tl.solve_lyapunov(beta, d)
    scale = np.max(np.abs(beta)) * np.max(np.abs(s)) + np.max(np.abs(d))
    assert np.max(np.abs(beta @ s + s @ beta.T - 2 * d)) <= 1e-10 * scale
    np.testing.assert_array_equal(s, s.T)


def test_kronecker_sum_matches_row_major_vec(rng):
    a = rng.normal(size=(3, 3))
    x = rng.normal(size=(3, 3))
    np.testing.assert_allclose(tl.kronecker_sum(a) @ x.reshape(-1), (a @ x + x @ a.T).reshape(-1))


def test_whiten_identity_and_scalar():
    np.testing.assert_allclose(tl.whiten(np.eye(3)), np.eye(3))
    np.testing.assert_allclose(tl.whiten(np.array([[4.0]])), [[0.5]])


def test_whiten_is_upper_triangular_when_cholesky_works(rng):
    w = tl.whiten(spd_matrix(rng, 3))
    np.testing.assert_array_equal(np.tril(w, -1), 0.0)


def test_whiten_offdiagonal_complex_symmetric():
    sigma = np.array([[0, 1.2], [1.2, 0]], dtype=complex)
    w = tl.whiten(sigma)
    np.testing.assert_allclose(w @ sigma @ w.T, np.eye(2), atol=1e-12)
    np.testing.assert_allclose(w.T @ w, np.linalg.inv(sigma), atol=1e-12)
    with pytest.raises(NearSingularPivot):
        tl.whiten(sigma, method="cholesky")


def test_whiten_principal_branch():
    w = tl.whiten(np.array([[-4.0 + 0j]]))
    # sqrt(-1/4) on the principal branch
    np.testing.assert_allclose(w, [[0.5j]])
    assert w[0, 0] ** 2 == pytest.approx(-0.25)


def test_whiten_rejects_asymmetric():
    with pytest.raises(NotSymmetric):
        tl.whiten(np.array([[1.0, 0.5], [0.0, 1.0]]))


@given(seeds, st.integers(1, 5))
def test_whiten_residual_real_spd(seed, n):
    rng = np.random.default_rng(seed)
    sigma = spd_matrix(rng, n)
    w = tl.whiten(sigma)
    assert np.isrealobj(w)
    assert np.max(np.abs(w.T @ w - np.linalg.inv(sigma))) <= 1e-9 * np.max(np.abs(np.linalg.inv(sigma)))
    assert np.max(np.abs(w @ sigma @ w.T - np.eye(n))) <= 1e-9


@given(seeds, st.integers(1, 4))
def test_whiten_residual_complex_symmetric(seed, n):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    sigma = a @ a.T + 2 * n * np.eye(n)
    w = tl.whiten(sigma)
    assert np.max(np.abs(w @ sigma @ w.T - np.eye(n))) <= 1e-9


def test_expm_zero_time_is_exact_identity(rng):
    m = rng.normal(size=(3, 3))
    assert np.max(np.abs(tl.matrix_exponential(m, 0.0) - np.eye(3))) <= 1e-14


def test_expm_diagonal():
    np.testing.assert_allclose(tl.matrix_exponential(np.diag([1.0, -2.0]), 0.3), np.diag(np.exp([0.3, -0.6])))


def test_expm_matches_taylor_series(rng):
    m = rng.normal(size=(3, 3))
    t = 0.7
    term = np.eye(3)
    total = np.eye(3)
    for k in range(1, 41):
        term = term @ (m * t) / k
        total = total + term
    assert np.max(np.abs(tl.matrix_exponential(m, t) - total)) <= 1e-10


def test_expm_defective_falls_back():
    m = np.array([[-1.0, 1.0], [0.0, -1.0]])
    t = 0.5
    expected = np.exp(-t) * np.array([[1.0, t], [0.0, 1.0]])
    np.testing.assert_allclose(tl.matrix_exponential(m, t), expected, atol=1e-14)


@given(seeds, st.floats(0, 1), st.floats(0, 1))
def test_expm_semigroup(seed, s, t):
    m = np.random.default_rng(seed).normal(size=(3, 3))
    lhs = tl.matrix_exponential(m, s + t)
    rhs = tl.matrix_exponential(m, s) @ tl.matrix_exponential(m, t)
    assert np.max(np.abs(lhs - rhs)) <= 1e-9 * max(1.0, np.max(np.abs(lhs)))
