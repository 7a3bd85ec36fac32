import numpy as np
import pytest
from hypothesis import given, strategies as st

from oul import ou_core as oc
from oul.errors import InvalidModel, Unstable
from oul.oracles import apply_fokker_planck, exact_ou_kernel, tensor_rule

from conftest import spd_matrix, stable_matrix

seeds = st.integers(0, 2**32 - 1)
SEEDED = oc.OUModel([[2.0, 1.0], [-0.5, 3.0]], [[1.0, 0.2], [0.2, 1.0]])


def _gh_integral(nf, values_fn, order=32):
    """int f dx for f = P_ness * smooth, via Gauss-Hermite in whitened coordinates."""
    n = nf.dim
    pts, w = tensor_rule(order, n)
    x = pts @ np.linalg.inv(nf.w).T
    phi = np.exp(-0.5 * np.sum(pts**2, axis=-1)) / (2 * np.pi) ** (n / 2)
    return np.sum(w * values_fn(x) / (phi * abs(np.linalg.det(nf.w))))


def test_model_validation():
    with pytest.raises(InvalidModel):
        oc.OUModel([[1.0, 0.0]], [[1.0]])
    with pytest.raises(InvalidModel):
        oc.OUModel([[1.0]], [[-1.0]])
    with pytest.raises(InvalidModel):
        oc.OUModel(np.eye(2), [[1.0, 0.3], [0.0, 1.0]])
    with pytest.raises(InvalidModel):
        oc.OUModel([[np.inf]], [[1.0]])


def test_from_sigma():
    m = oc.OUModel.from_sigma([[2.0]], [[np.sqrt(2.0)]])
    np.testing.assert_allclose(m.d, [[1.0]])
    np.testing.assert_allclose(m.noise_matrix() @ m.noise_matrix().T, 2 * m.d)


def test_quadratic_form_examples():
    np.testing.assert_array_equal(oc.build_quadratic_form(oc.OUModel([[0.0]], [[1.0]])), [[0, 0], [0, 2]])
    m = oc.OUModel([[2.0]], [[1.0]])
    np.testing.assert_array_equal(oc.build_quadratic_form(m, "forward"), [[0, -2], [-2, 2]])
    np.testing.assert_array_equal(oc.build_quadratic_form(m, "adjoint"), [[0, 2], [2, 2]])
    s = oc.build_quadratic_form(SEEDED)
    np.testing.assert_array_equal(s, s.T)
    with pytest.raises(ValueError):
        oc.build_quadratic_form(m, "sideways")


def test_normal_form_scalar():
    nf = oc.normal_form(oc.OUModel([[2.0]], [[1.0]]))
    np.testing.assert_allclose(nf.p, [[1.0]])
    np.testing.assert_allclose(nf.delta, [2.0])
    np.testing.assert_allclose(nf.sigma_inf, [[0.5]])
    np.testing.assert_allclose(nf.v, [[1.0, -0.5], [0.0, 1.0]])
    np.testing.assert_allclose(nf.v_adjoint, [[1.0, 0.5], [0.0, 1.0]])


def test_normal_form_diagonal():
    nf = oc.normal_form(oc.OUModel(np.diag([1.0, 3.0]), np.eye(2)))
    np.testing.assert_allclose(nf.sigma_inf, np.diag([1.0, 1 / 3]), atol=1e-15)
    np.testing.assert_allclose(nf.v[:2, 2:], -np.diag([1.0, 1 / 3]), atol=1e-15)


def test_normal_form_triangular_symplectic():
    nf = oc.normal_form(oc.OUModel([[2.0, 1.0], [0.0, 3.0]], [[1.0, 0.2], [0.2, 1.0]]))
    j = oc.symplectic_unit(2)
    assert np.max(np.abs(nf.v.T @ j @ nf.v - j)) <= 1e-10


def test_unstable_rejected():
    with pytest.raises(Unstable):
        oc.normal_form(oc.OUModel([[-1.0]], [[1.0]]))


@given(seeds, st.integers(1, 3))
def test_normal_form_invariants(seed, n):
    rng = np.random.default_rng(seed)
    model = oc.OUModel(stable_matrix(rng, n), spd_matrix(rng, n))
    nf = oc.normal_form(model)
    j = oc.symplectic_unit(n)
    assert np.max(np.abs(nf.v.T @ j @ nf.v - j)) <= 1e-9
    assert np.max(np.abs(nf.v_adjoint.T @ j @ nf.v_adjoint - j)) <= 1e-9
    delta = np.diag(nf.delta)
    z = np.zeros((n, n))
    block = np.block([[z, delta], [delta, z]])
    vinv = np.linalg.inv(nf.v)
    fwd = vinv.T @ oc.build_quadratic_form(model, "forward") @ vinv
    vainv = np.linalg.inv(nf.v_adjoint)
    adj = vainv.T @ oc.build_quadratic_form(model, "adjoint") @ vainv
    assert np.max(np.abs(fwd + block)) <= 1e-8
    assert np.max(np.abs(adj - block)) <= 1e-8
    a, b, c = nf.ladder_coefficients()
    np.testing.assert_allclose(a, nf.p_inv)
    np.testing.assert_allclose(b, nf.p_inv @ nf.sigma_inf)
    np.testing.assert_allclose(c, -nf.p.T)


def test_spectrum_examples():
    nf = oc.normal_form(SEEDED)
    assert oc.spectrum(nf, 0) == [oc.SpectralMode((0, 0), 0j)]
    nf2 = oc.normal_form(oc.OUModel(np.diag([2.0, 3.0]), np.eye(2)))
    modes = {m.index: m.eigenvalue for m in oc.spectrum(nf2, 2)}
    assert modes[(1, 0)] == -2
    assert len(modes) == 6
    # complex-conjugate relaxation rates combine to a real eigenvalue
    nf3 = oc.normal_form(oc.OUModel([[1.0, 2.0], [-2.0, 1.0]], np.eye(2)))
    np.testing.assert_allclose(nf3.delta, [1 - 2j, 1 + 2j])
    modes3 = {m.index: m.eigenvalue for m in oc.spectrum(nf3, 2)}
    assert modes3[(1, 1)] == pytest.approx(-2.0)


def test_ness_density_values():
    nf = oc.normal_form(oc.OUModel([[2.0]], [[1.0]]))
    assert oc.ness_density(nf, [0.0]) == pytest.approx(0.5641895835477563, rel=1e-12)
    nf2 = oc.normal_form(oc.OUModel(np.diag([1.0, 3.0]), np.eye(2)))
    g = lambda x, s: np.exp(-x * x / (2 * s)) / np.sqrt(2 * np.pi * s)
    assert oc.ness_density(nf2, [1.0, 1.0]) == pytest.approx(g(1.0, 1.0) * g(1.0, 1 / 3), rel=1e-12)


@given(seeds, st.integers(1, 2))
def test_ness_normalized(seed, n):
    rng = np.random.default_rng(seed)
    nf = oc.normal_form(oc.OUModel(stable_matrix(rng, n), spd_matrix(rng, n)))
    assert _gh_integral(nf, lambda x: oc.ness_density(nf, x), order=8) == pytest.approx(1.0, abs=1e-8)


def test_scalar_eigenfunctions_hand_expansion():
    nf = oc.normal_form(oc.OUModel([[2.0]], [[1.0]]))
    x = np.linspace(-2, 2, 9)[:, None]
    p = oc.ness_density(nf, x)
    np.testing.assert_allclose(oc.right_eigenfunction(nf, (0,), x), p)
    # W = sqrt(2), P = 1: r_1 = P_ness * sqrt(2) * H_1(sqrt(2) x), l_1 = H_1(sqrt(2) x) / sqrt(2)
    np.testing.assert_allclose(oc.right_eigenfunction(nf, (1,), x), p * 2 * x[:, 0], atol=1e-15)
    np.testing.assert_allclose(oc.left_eigenfunction(nf, (1,), x), x[:, 0], atol=1e-15)
    np.testing.assert_allclose(oc.left_eigenfunction(nf, (0,), x), 1.0)


def test_biorthonormality_seeded():
    nf = oc.normal_form(SEEDED)
    modes = oc.spectrum(nf, 3)
    for mu in modes:
        for nu in modes:
            val = _gh_integral(
                nf, lambda x: oc.left_eigenfunction(nf, mu.index, x) * oc.right_eigenfunction(nf, nu.index, x)
            )
            assert abs(val - (mu.index == nu.index)) <= 1e-7


@pytest.mark.parametrize("mu", [(1, 0), (0, 1), (1, 1), (2, 1), (0, 3)])
def test_eigenfunction_pde_residuals(mu):
    nf = oc.normal_form(SEEDED)
    eig = -np.dot(mu, nf.delta)
    g = np.linspace(-4, 4, 17)
    xp = np.stack(np.meshgrid(g, g, indexing="ij"), axis=-1).reshape(-1, 2)
    pts = xp @ np.linalg.inv(nf.w).T
    r = lambda x: oc.right_eigenfunction(nf, mu, x)
    l = lambda x: oc.left_eigenfunction(nf, mu, x)
    lr = apply_fokker_planck(r, pts, SEEDED.beta, SEEDED.d, h=1e-3, direction="forward")
    ll = apply_fokker_planck(l, pts, SEEDED.beta, SEEDED.d, h=1e-3, direction="adjoint")
    assert np.linalg.norm(lr - eig * r(pts)) / np.linalg.norm(r(pts)) <= 5e-4
    assert np.linalg.norm(ll - eig * l(pts)) / np.linalg.norm(l(pts)) <= 5e-4


def test_transition_density_long_time_limit():
    nf = oc.normal_form(SEEDED)
    x = np.array([[0.3, -0.2], [1.0, 0.5]])
    t = 50 / np.min(nf.delta.real)
    np.testing.assert_allclose(oc.transition_density(nf, x, [2.0, -1.0], t), oc.ness_density(nf, x), atol=1e-10)


def test_transition_density_scalar_exact():
    beta, d = np.array([[2.0]]), np.array([[1.0]])
    nf = oc.normal_form(oc.OUModel(beta, d))
    x = np.linspace(-3, 3, 31)[:, None]
    for x0 in (-2.0, 0.0, 1.5):
        approx = oc.transition_density(nf, x, [x0], 0.5, max_total_order=20)
        mean, var = np.exp(-1.0) * x0, 0.5 * (1 - np.exp(-2.0))
        exact = np.exp(-((x[:, 0] - mean) ** 2) / (2 * var)) / np.sqrt(2 * np.pi * var)
        assert np.max(np.abs(approx - exact)) <= 1e-6


def test_transition_density_real_and_normalized():
    model = oc.OUModel([[1.0, 2.0], [-2.0, 1.0]], [[1.0, 0.1], [0.1, 0.5]])
    nf = oc.normal_form(model)
    x0 = np.array([0.4, -0.3])
    t = 1.5
    g = np.linspace(-3, 3, 7)
    pts = np.stack(np.meshgrid(g, g, indexing="ij"), axis=-1).reshape(-1, 2)
    val = oc.transition_density(nf, pts, x0, t)
    assert np.max(np.abs(val.imag)) <= 1e-8
    np.testing.assert_allclose(val.real, exact_ou_kernel(model.beta, model.d, pts, x0, t), atol=1e-6)
    mass = _gh_integral(nf, lambda x: oc.transition_density(nf, x, x0, t), order=20)
    assert mass == pytest.approx(1.0, abs=1e-6)


def test_transition_density_rejects_nonpositive_time():
    with pytest.raises(ValueError):
        oc.transition_density(oc.normal_form(SEEDED), [0.0, 0.0], [0.0, 0.0], 0.0)


def test_covariance_trajectory_limits():
    sigma0 = np.array([[0.3, 0.1], [0.1, 0.2]])
    np.testing.assert_allclose(oc.covariance_trajectory(SEEDED, sigma0, 0.0), sigma0)
    s_inf = oc.normal_form(SEEDED).sigma_inf
    np.testing.assert_allclose(oc.covariance_trajectory(SEEDED, s_inf, 3.0), s_inf, atol=1e-14)


def test_covariance_trajectory_rk4():
    rng = np.random.default_rng(3)
    beta, d = stable_matrix(rng, 2), spd_matrix(rng, 2)
    model = oc.OUModel(beta, d)
    s = np.zeros((2, 2))
    f = lambda s: -beta @ s - s @ beta.T + 2 * d
    h = 1e-4
    for _ in range(8000):
        k1 = f(s)
        k2 = f(s + h / 2 * k1)
        k3 = f(s + h / 2 * k2)
        k4 = f(s + h * k3)
        s = s + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    np.testing.assert_allclose(oc.covariance_trajectory(model, np.zeros((2, 2)), 0.8), s, atol=1e-8)
