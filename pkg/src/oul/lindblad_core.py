"""Quadratic bosonic master equations as complex Ornstein-Uhlenbeck processes.

For ``N`` modes with Hamiltonian ``sum H_nm a+_n a_m + (1/2) sum (K_nm a+_n a+_m + h.c.)``
and jump operators ``sum_m (l_bm a_m + p*_bm a+_m)``, the Husimi function
``Q(alpha) = <alpha|rho|alpha> / pi^N`` obeys

    d_t Q = (d_alpha, d_alpha*) . [beta_q z + D_q (d_alpha, d_alpha*)^T] Q,   z = (alpha, alpha*),

a Fokker-Planck equation with complex ``2N x 2N`` drift and diffusion. The
classical normal-form machinery of :mod:`oul.ou_core` then carries over
verbatim (transpose, never adjoint).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Literal

import numpy as np

from . import tensor_linalg as tl
from .errors import InvalidModel, PreconditionNotMet, SingularCovariance, Unstable
from .hermite_mehler import evaluate_expansion, mehler_kernel
from .ou_core import NormalForm, SpectralMode, normal_form_from_matrices, propagate_covariance, spectrum

__all__ = [
    "LindbladModel",
    "DissipationMatrices",
    "ComplexOUForm",
    "QNormalForm",
    "OpticalRepresentation",
    "block_swap",
    "doubled",
    "assemble_dissipation",
    "build_complex_ou",
    "q_normal_form",
    "q_ness",
    "q_spectrum",
    "q_right_eigenfunction",
    "q_left_eigenfunction",
    "q_pde_coefficients",
    "covariance_evolution",
    "coherent_covariance",
    "propagate_q_mehler",
    "propagate_q_spectral",
    "optical_representation",
]

Normalization = Literal["physical", "complex"]


def _hermitian_part_error(m):
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


@dataclass(frozen=True)
class LindbladModel:
    """Quadratic master equation: ``h`` (Hermitian), ``k`` (symmetric) and bath rows ``(l_b, p_b)``."""

    h: np.ndarray
    k: np.ndarray
    baths: tuple = ()

    def __post_init__(self):
        h = np.atleast_2d(np.asarray(self.h, dtype=complex))
        n = h.shape[0]
        if h.shape != (n, n):
            raise InvalidModel(f"h must be square, got {h.shape}")
        k = np.zeros((n, n), dtype=complex) if self.k is None else np.atleast_2d(np.asarray(self.k, dtype=complex))
        if k.shape != (n, n):
            raise InvalidModel(f"k must be {n}x{n}, got {k.shape}")
        if _hermitian_part_error(h) > 1e-12:
            raise InvalidModel("h must be Hermitian")
        if np.max(np.abs(k - k.T)) > 1e-12:
            raise InvalidModel("k must be symmetric")
        baths = []
        for b, (l, p) in enumerate(self.baths):
            l = np.asarray(l, dtype=complex).reshape(-1)
            p = np.asarray(p, dtype=complex).reshape(-1)
            if l.shape != (n,) or p.shape != (n,):
                raise InvalidModel(f"bath {b}: coupling rows must have length {n}")
            baths.append((l, p))
        for arr in [h, k] + [x for pair in baths for x in pair]:
            if not np.all(np.isfinite(arr)):
                raise InvalidModel("model has non-finite entries")
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "baths", tuple(baths))

    @property
    def n_modes(self):
        return self.h.shape[0]

    @classmethod
    def quantum_optical(cls, kappa=1.0, nbar=0.0, omega=0.0):
        """Single damped mode: ``gamma_down = 2 kappa (nbar + 1)``, ``gamma_up = 2 kappa nbar``."""
        g_down = 2.0 * kappa * (nbar + 1.0)
        g_up = 2.0 * kappa * nbar
        return cls.from_rates(g_down, g_up, omega)

    @classmethod
    def from_rates(cls, gamma_down, gamma_up, omega=0.0):
        baths = [([np.sqrt(gamma_down)], [0.0])]
        if gamma_up:
            baths.append(([0.0], [np.sqrt(gamma_up)]))
        return cls([[omega]], [[0.0]], tuple(baths))


@dataclass(frozen=True)
class DissipationMatrices:
    loss: np.ndarray
    pump: np.ndarray
    coherence: np.ndarray


def assemble_dissipation(model: LindbladModel) -> DissipationMatrices:
    """``L_nm = sum_b l*_bn l_bm``, ``P_nm = sum_b p*_bn p_bm``, ``C_nm = sum_b l*_bn p*_bm``."""
    n = model.n_modes
    loss = np.zeros((n, n), dtype=complex)
    pump = np.zeros((n, n), dtype=complex)
    coh = np.zeros((n, n), dtype=complex)
    for l, p in model.baths:
        loss += np.outer(l.conj(), l)
        pump += np.outer(p.conj(), p)
        coh += np.outer(l.conj(), p.conj())
    return DissipationMatrices(loss, pump, coh)


@dataclass(frozen=True)
class ComplexOUForm:
    beta_q: np.ndarray
    d_q: np.ndarray
    trace_shift: complex

    @property
    def n_modes(self):
        return self.beta_q.shape[0] // 2


def block_swap(n_modes):
    """Permutation exchanging the ``alpha`` and ``alpha*`` halves."""
    z = np.zeros((n_modes, n_modes))
    e = np.eye(n_modes)
    return np.block([[z, e], [e, z]])


def doubled(alpha):
    """``(alpha, alpha*)`` along the last axis."""
    alpha = np.asarray(alpha, dtype=complex)
    return np.concatenate([alpha, alpha.conj()], axis=-1)


def build_complex_ou(model: LindbladModel) -> ComplexOUForm:
    diss = assemble_dissipation(model)
    h, k = model.h, model.k
    gain = 0.5 * (diss.loss - diss.pump)
    h_plus = 1j * h + gain
    h_minus = -1j * h + gain
    b12 = 1j * k + 0.5 * (diss.coherence - diss.coherence.T)
    d11 = 1j * k - 0.5 * (diss.coherence + diss.coherence.T)
    beta_q = np.block([[h_plus, b12], [b12.conj(), h_minus.T]])
    d_q = 0.5 * np.block([[d11, diss.loss], [diss.loss.T, d11.conj()]])
    trace_shift = 0.5 * np.trace(diss.loss - diss.pump)
    return ComplexOUForm(beta_q, d_q, complex(trace_shift))


def q_pde_coefficients(form: ComplexOUForm):
    """``(drift, diffusion)`` of the Q-function equation in the ``(d_alpha, d_alpha*)`` convention."""
    return form.beta_q, form.d_q


@dataclass(frozen=True)
class QNormalForm:
    """Normal form of the Q-function generator plus its Gaussian normalization data."""

    form: ComplexOUForm
    nf: NormalForm
    # precision matrix of Q_ness in real coordinates (Re alpha, Im alpha); None if not positive definite
    real_precision: np.ndarray | None
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def n_modes(self):
        return self.form.n_modes

    @property
    def sigma_inf(self):
        return self.nf.sigma_inf

    @property
    def is_physical(self):
        return self.real_precision is not None


def _real_coordinate_map(n_modes):
    """``T`` with ``z = T u``, ``u = (Re alpha, Im alpha)``."""
    e = np.eye(n_modes)
    return np.block([[e, 1j * e], [e, -1j * e]])


def q_normal_form(form: ComplexOUForm) -> QNormalForm:
    nf = normal_form_from_matrices(form.beta_q, form.d_q)
    t = _real_coordinate_map(form.n_modes)
    precision = nf.w.T @ nf.w
    a = t.T @ precision @ t
    scale = max(1.0, float(np.max(np.abs(a))))
    real_precision = None
    if np.max(np.abs(a.imag)) <= 1e-9 * scale:
        a = 0.5 * (a.real + a.real.T)
        if np.min(np.linalg.eigvalsh(a)) > 1e-12 * scale:
            real_precision = a
    return QNormalForm(form, nf, real_precision)


def _gaussian_norm(qnf: QNormalForm, normalization):
    n = qnf.n_modes
    if normalization == "physical":
        if qnf.real_precision is None:
            raise SingularCovariance(
                "stationary covariance does not define a normalizable Q-function; use normalization='complex'"
            )
        return (2.0 * np.pi) ** n / np.sqrt(np.linalg.det(qnf.real_precision))
    if normalization == "complex":
        return (2.0 * np.pi) ** n * np.sqrt(complex(np.linalg.det(qnf.sigma_inf)))
    raise ValueError(f"unknown normalization {normalization!r}")


def _as_points(qnf: QNormalForm, alpha):
    """Complex points with a trailing mode axis; single-mode input may omit it."""
    alpha = np.asarray(alpha, dtype=complex)
    if qnf.n_modes == 1 and (alpha.ndim == 0 or alpha.shape[-1] != 1):
        alpha = alpha[..., None]
    if alpha.shape[-1] != qnf.n_modes:
        raise ValueError(f"points need a trailing axis of length {qnf.n_modes}")
    return alpha


def _q_weight(qnf: QNormalForm, z, normalization):
    zp = qnf.nf.whitened(z)
    quad = np.sum(zp * zp, axis=-1)
    return np.exp(-0.5 * quad) / _gaussian_norm(qnf, normalization)


def q_ness(qnf: QNormalForm, alpha, normalization: Normalization = "physical"):
    """Stationary Husimi function.

    ``"physical"`` normalizes to unit mass in ``d^2N alpha = prod d(Re) d(Im)``
    and returns a real array. ``"complex"`` divides by ``(2 pi)^N sqrt(det Sigma)``
    (principal branch) and returns the complex raw value.
    """
    z = doubled(_as_points(qnf, alpha))
    out = _q_weight(qnf, z, normalization)
    if normalization == "physical":
        return np.real(out)
    return out


def q_spectrum(qnf: QNormalForm, max_total_order: int = 12) -> list[SpectralMode]:
    return spectrum(qnf.nf, max_total_order)


def q_right_eigenfunction(qnf: QNormalForm, mu, alpha, normalization: Normalization = "physical"):
    z = doubled(_as_points(qnf, alpha))
    poly = evaluate_expansion(qnf.nf.right_expansion(mu), qnf.nf.whitened(z))
    return _q_weight(qnf, z, normalization) * poly


def q_left_eigenfunction(qnf: QNormalForm, mu, alpha):
    z = doubled(_as_points(qnf, alpha))
    return evaluate_expansion(qnf.nf.left_expansion(mu), qnf.nf.whitened(z))


def coherent_covariance(n_modes):
    """Covariance of the Husimi function of any coherent state: ``<d alpha d alpha*> = 1``."""
    return block_swap(n_modes).astype(complex)


def covariance_evolution(form: ComplexOUForm, sigma0, t):
    """``Sigma(t) = exp(-beta_q t) (Sigma0 - Sigma_inf) exp(-beta_q^T t) + Sigma_inf``."""
    if t < 0:
        raise ValueError("t must be non-negative")
    sigma_inf = tl.solve_lyapunov(form.beta_q, form.d_q)
    return propagate_covariance(form.beta_q, sigma_inf, np.asarray(sigma0, dtype=complex), t)


def _check_mehler(qnf: QNormalForm):
    if qnf.n_modes != 1:
        raise PreconditionNotMet("Mehler propagation is only available for a single mode")
    dev = float(np.max(np.abs(qnf.nf.p @ qnf.nf.w - np.eye(2))))
    if dev > 1e-10:
        raise PreconditionNotMet(
            f"||P_q W_q - 1|| = {dev:.3g}; use propagate_q_spectral for this model"
        )


def propagate_q_mehler(qnf: QNormalForm, alpha0, t, alpha, normalization: Normalization = "physical"):
    """Closed-form kernel ``Q_ness(alpha) E(e^-b1 t, a'_1, a'_01) E(e^-b2 t, a'_2, a'_02)``.

    Requires one mode and ``P_q W_q = 1``. The initial condition enters as a
    point in ``(alpha, alpha*)`` space, i.e. this is the transition kernel that
    ``propagate_q_spectral(..., coefficients="point")`` sums term by term.
    """
    _check_mehler(qnf)
    if t <= 0:
        raise ValueError("t must be positive")
    z = doubled(_as_points(qnf, alpha))
    zp = qnf.nf.whitened(z)
    z0p = qnf.nf.whitened(doubled(np.atleast_1d(np.asarray(alpha0, dtype=complex))))
    b1, b2 = np.asarray(qnf.nf.delta, dtype=complex)
    kernel = mehler_kernel(np.exp(-b1 * t), zp[..., 0], z0p[0]) * mehler_kernel(np.exp(-b2 * t), zp[..., 1], z0p[1])
    return _q_weight(qnf, z, normalization) * kernel


def _coherent_coefficients(qnf: QNormalForm, modes, alpha0, max_total_order):
    """``<l_mu | rho0>`` for ``rho0 = |alpha0><alpha0|``: integral of ``l_mu`` against its Husimi function.

    The coherent-state Husimi function is an isotropic Gaussian of variance
    1/2 per real coordinate, and ``l_mu`` is a polynomial of degree ``|mu|``,
    so a tensor Gauss-Hermite rule of ``|mu|/2 + 1`` nodes is exact.
    """
    n = qnf.n_modes
    nodes, weights = np.polynomial.hermite_e.hermegauss(max(2, max_total_order // 2 + 2))
    weights = weights / np.sqrt(2.0 * np.pi)
    grids = np.meshgrid(*([nodes] * (2 * n)), indexing="ij")
    wgrid = np.ones_like(grids[0])
    for axis in range(2 * n):
        wgrid = wgrid * weights.reshape([-1 if a == axis else 1 for a in range(2 * n)])
    u = np.stack([g.ravel() for g in grids], axis=-1) / np.sqrt(2.0)
    alpha = np.asarray(alpha0, dtype=complex)[None, :] + u[:, :n] + 1j * u[:, n:]
    zp = qnf.nf.whitened(doubled(alpha))
    w = wgrid.ravel()
    return [complex(np.sum(w * evaluate_expansion(qnf.nf.left_expansion(m.index), zp))) for m in modes]


def propagate_q_spectral(
    qnf: QNormalForm,
    alpha0,
    t,
    alpha,
    max_total_order: int = 14,
    coefficients: Literal["coherent", "point"] = "coherent",
    normalization: Normalization = "physical",
):
    """Husimi function at time ``t`` from the truncated spectral sum.

    ``coefficients="coherent"`` starts from the coherent state ``|alpha0>``
    (overlaps are the left eigenfunctions averaged over its Husimi function).
    ``"point"`` evaluates the left eigenfunctions at ``(alpha0, alpha0*)``,
    which is the transition kernel from a point initial condition.
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    alpha = _as_points(qnf, alpha)
    alpha0 = np.atleast_1d(np.asarray(alpha0, dtype=complex))
    modes = spectrum(qnf.nf, max_total_order)
    if coefficients == "coherent":
        coeffs = _coherent_coefficients(qnf, modes, alpha0, max_total_order)
    elif coefficients == "point":
        z0p = qnf.nf.whitened(doubled(alpha0))
        coeffs = [complex(evaluate_expansion(qnf.nf.left_expansion(m.index), z0p)) for m in modes]
    else:
        raise ValueError(f"unknown coefficients mode {coefficients!r}")
    z = doubled(alpha)
    zp = qnf.nf.whitened(z)
    total = np.zeros(alpha.shape[:-1], dtype=complex)
    for mode, c in zip(modes, coeffs):
        if c == 0:
            continue
        total = total + np.exp(mode.eigenvalue * t) * c * evaluate_expansion(qnf.nf.right_expansion(mode.index), zp)
    out = _q_weight(qnf, z, normalization) * total
    if normalization == "physical":
        return np.real(out)
    return out


@dataclass(frozen=True)
class OpticalRepresentation:
    """Coefficients of one phase-space form of the damped-oscillator master equation.

    P and Q: ``d_t F = drift (d_a a + d_a* a*) F + diffusion d_a d_a* F``.
    Characteristic function: ``d_t X = drift (eta* d_eta* + eta d_eta) X + multiplier eta eta* X``.
    """

    representation: str
    gamma_down: object
    gamma_up: object
    kappa: object
    nbar: object
    drift: object
    diffusion: object = None
    multiplier: object = None

    def drift_matrix(self):
        return self.drift * np.eye(2)

    def diffusion_matrix(self):
        """Symmetric matrix ``D`` with ``sum_ij D_ij d_i d_j = diffusion d_a d_a*``."""
        if self.diffusion is None:
            return None
        return 0.5 * self.diffusion * block_swap(1)


def optical_representation(gamma_down, gamma_up, representation: Literal["P", "Q", "characteristic_o"] = "P"):
    """Phase-space coefficients for ``gamma_down D[a] + gamma_up D[a+]``.

    Rates may be floats or :class:`fractions.Fraction` (arithmetic stays exact
    for the P and characteristic-function forms).
    """
    if not gamma_down > gamma_up or gamma_up < 0:
        raise Unstable(f"need gamma_down > gamma_up >= 0, got {gamma_down}, {gamma_up}")
    relax = (gamma_down - gamma_up) / 2
    kappa = relax
    nbar = gamma_up / (gamma_down - gamma_up)
    common = dict(gamma_down=gamma_down, gamma_up=gamma_up, kappa=kappa, nbar=nbar)
    if representation == "P":
        return OpticalRepresentation("P", drift=relax, diffusion=gamma_up, **common)
    if representation == "characteristic_o":
        return OpticalRepresentation("characteristic_o", drift=-relax, multiplier=-gamma_up, **common)
    if representation == "Q":
        form = build_complex_ou(LindbladModel.from_rates(float(gamma_down), float(gamma_up)))
        drift = form.beta_q[0, 0].real
        diffusion = 2.0 * form.d_q[0, 1].real
        if isinstance(gamma_down, Fraction) and isinstance(gamma_up, Fraction):
            drift = Fraction(drift).limit_denominator(10**9)
            diffusion = Fraction(diffusion).limit_denominator(10**9)
        return OpticalRepresentation("Q", drift=drift, diffusion=diffusion, **common)
    raise ValueError(f"unknown representation {representation!r}")
