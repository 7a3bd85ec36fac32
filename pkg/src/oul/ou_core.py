"""Spectral theory of the multidimensional Ornstein-Uhlenbeck process.

The process ``dx = -beta x dt + sigma dW`` has Fokker-Planck generator

    L P = sum_ij beta_ij d_i (x_j P) + sum_ij D_ij d_i d_j P,   D = sigma sigma^T / 2.

Written as a quadratic form in the position/derivative superoperators, a
block-triangular symplectic passage matrix ``V`` brings ``L`` to the normal
form ``-sum_i beta_i zeta'_i zeta_i``. From that, eigenvalues are
``E_mu = -sum_i mu_i beta_i`` and the eigenfunctions are Gaussian-weighted
(right) or bare (left) sums of products of Hermite polynomials in whitened
coordinates ``x' = W x`` with ``W^T W = Sigma_inf^-1``.

All matrix algebra uses plain transposes so the same code serves the complex
drift and diffusion matrices of the quantum Q-function equation.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from . import tensor_linalg as tl
from .errors import InvalidModel
from .hermite_mehler import evaluate_expansion, hermite_expansion, multi_indices

__all__ = [
    "OUModel",
    "NormalForm",
    "SpectralMode",
    "symplectic_unit",
    "build_quadratic_form",
    "normal_form",
    "normal_form_from_matrices",
    "spectrum",
    "ness_density",
    "right_eigenfunction",
    "left_eigenfunction",
    "transition_density",
    "covariance_trajectory",
    "propagate_covariance",
]

DEFAULT_MAX_ORDER = 12


@dataclass(frozen=True)
class OUModel:
    """Drift ``beta`` and diffusion ``d`` of ``dx = -beta x dt + sigma dW``."""

    beta: np.ndarray
    d: np.ndarray

    def __post_init__(self):
        beta = np.atleast_2d(np.asarray(self.beta, dtype=float))
        d = np.atleast_2d(np.asarray(self.d, dtype=float))
        if beta.ndim != 2 or beta.shape[0] != beta.shape[1]:
            raise InvalidModel(f"beta must be square, got {beta.shape}")
        if d.shape != beta.shape:
            raise InvalidModel(f"diffusion shape {d.shape} does not match beta {beta.shape}")
        if not (np.all(np.isfinite(beta)) and np.all(np.isfinite(d))):
            raise InvalidModel("model has non-finite entries")
        scale = max(1.0, float(np.max(np.abs(d))))
        if np.max(np.abs(d - d.T)) > 1e-12 * scale:
            raise InvalidModel("diffusion matrix must be symmetric")
        if np.min(np.linalg.eigvalsh(0.5 * (d + d.T))) < -1e-12 * scale:
            raise InvalidModel("diffusion matrix must be positive semi-definite")
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "d", 0.5 * (d + d.T))

    @classmethod
    def from_sigma(cls, beta, sigma):
        sigma = np.atleast_2d(np.asarray(sigma, dtype=float))
        return cls(beta, 0.5 * sigma @ sigma.T)

    @property
    def dim(self):
        return self.beta.shape[0]

    def noise_matrix(self):
        """A square root ``sigma`` of ``2 d`` (symmetric PSD root)."""
        w, v = np.linalg.eigh(2.0 * self.d)
        return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.T


def symplectic_unit(n):
    z = np.zeros((n, n))
    eye = np.eye(n)
    return np.block([[z, eye], [-eye, z]])


def build_quadratic_form(model: OUModel, direction: Literal["forward", "adjoint"] = "forward"):
    """Symmetric 2N x 2N matrix ``S-`` (forward) or ``S+`` (adjoint)."""
    return _quadratic_form(model.beta, model.d, direction)


def _quadratic_form(beta, d, direction):
    if direction == "forward":
        sign = -1.0
    elif direction == "adjoint":
        sign = 1.0
    else:
        raise ValueError(f"direction must be 'forward' or 'adjoint', not {direction!r}")
    n = beta.shape[0]
    zero = np.zeros((n, n), dtype=np.result_type(beta, d))
    return np.block([[zero, sign * beta.T], [sign * beta, 2.0 * d]])


@dataclass(frozen=True)
class SpectralMode:
    index: tuple
    eigenvalue: complex


@dataclass(frozen=True)
class NormalForm:
    """Eigen-data, stationary covariance and passage matrices of one quadratic generator."""

    beta: np.ndarray
    d: np.ndarray
    p: np.ndarray
    p_inv: np.ndarray
    delta: np.ndarray
    sigma_inf: np.ndarray
    v: np.ndarray
    v_adjoint: np.ndarray
    w: np.ndarray
    w_inv: np.ndarray
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def dim(self):
        return self.beta.shape[0]

    def ladder_coefficients(self):
        """Coefficient rows of the ladder operators.

        ``zeta_i = sum_j A_ij x_j + sum_j B_ij d_j`` and
        ``zeta'_i = sum_j C_ij d_j``; returns ``(A, B, C) = (P^-1, P^-1 Sigma, -P^T)``.
        """
        n = self.dim
        return self.v[:n, :n], -self.v[:n, n:], -self.v[n:, n:]

    def right_expansion(self, mu):
        key = ("r", tuple(mu))
        if key not in self._cache:
            self._cache[key] = hermite_expansion(mu, (self.w @ self.p).T)
        return self._cache[key]

    def left_expansion(self, mu):
        key = ("l", tuple(mu))
        if key not in self._cache:
            self._cache[key] = hermite_expansion(mu, self.p_inv @ self.w_inv)
        return self._cache[key]

    def whitened(self, x):
        return np.asarray(x) @ self.w.T


def normal_form_from_matrices(beta, d, whitening="auto") -> NormalForm:
    """Normal form over the real or complex field from raw ``(beta, d)``."""
    beta = np.asarray(beta)
    d = np.asarray(d)
    eig = tl.eigendecompose(beta)
    sigma = tl.solve_lyapunov(beta, d)
    w = tl.whiten(sigma, method=whitening)
    p, p_inv = eig.right_vectors, eig.inverse_vectors
    n = beta.shape[0]
    zero = np.zeros((n, n), dtype=np.result_type(p, sigma))
    v = np.block([[p_inv, -p_inv @ sigma], [zero, p.T]])
    v_adj = np.block([[p_inv, p_inv @ sigma], [zero, p.T]])
    return NormalForm(
        beta=beta,
        d=d,
        p=p,
        p_inv=p_inv,
        delta=eig.values,
        sigma_inf=sigma,
        v=v,
        v_adjoint=v_adj,
        w=w,
        w_inv=np.linalg.inv(w),
    )


def normal_form(model: OUModel) -> NormalForm:
    return normal_form_from_matrices(model.beta, model.d)


def spectrum(nf: NormalForm, max_total_order: int = DEFAULT_MAX_ORDER):
    """Eigenvalues ``-sum mu_i beta_i`` for every ``|mu| <= max_total_order`` (graded-lex)."""
    if max_total_order < 0:
        raise ValueError("max_total_order must be >= 0")
    delta = np.asarray(nf.delta, dtype=complex)
    return [
        SpectralMode(mu, complex(-np.dot(mu, delta)) + 0.0)
        for mu in multi_indices(nf.dim, max_total_order)
    ]


def ness_density(nf: NormalForm, x):
    """Stationary Gaussian ``exp(-x^T Sigma^-1 x / 2) / ((2 pi)^(N/2) sqrt(det Sigma))``."""
    x = np.asarray(x, dtype=float)
    n = nf.dim
    xp = nf.whitened(x)
    quad = np.sum(xp * xp, axis=-1)
    norm = (2.0 * np.pi) ** (n / 2.0) * np.sqrt(np.linalg.det(nf.sigma_inf))
    return np.real(np.exp(-0.5 * quad) / norm)


def right_eigenfunction(nf: NormalForm, mu, x):
    """``r_mu(x) = P_ness(x) sum c_n prod_t H_{n_t}(x'_t)`` with coefficients from ``(W P)^T``.

    This is ``prod_i (zeta'_i)^mu_i / sqrt(mu_i!)`` applied to the stationary
    density, so that ``<l_mu, r_nu> = delta_mu,nu``.
    """
    x = np.asarray(x, dtype=float)
    poly = evaluate_expansion(nf.right_expansion(mu), nf.whitened(x))
    return ness_density(nf, x) * poly


def left_eigenfunction(nf: NormalForm, mu, x):
    """Polynomial eigenfunction of the backward generator; ``l_0 = 1``."""
    x = np.asarray(x, dtype=float)
    return evaluate_expansion(nf.left_expansion(mu), nf.whitened(x))


def transition_density(nf: NormalForm, x, x0, t, max_total_order: int = DEFAULT_MAX_ORDER):
    """Truncated spectral sum ``sum_mu exp(E_mu t) r_mu(x) l_mu(x0)``.

    Converges slowly when ``t * min Re(beta_i)`` is small (below ~0.25 the
    default order is not enough for 1e-6 accuracy).
    """
    if t <= 0:
        raise ValueError("t must be positive")
    x = np.asarray(x, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    xp = nf.whitened(x)
    x0p = nf.whitened(x0)
    total = 0.0
    for mode in spectrum(nf, max_total_order):
        weight = np.exp(mode.eigenvalue * t)
        r = evaluate_expansion(nf.right_expansion(mode.index), xp)
        l = evaluate_expansion(nf.left_expansion(mode.index), x0p)
        total = total + weight * r * l
    return ness_density(nf, x) * total


def propagate_covariance(beta, sigma_inf, sigma0, t):
    """``exp(-beta t) (Sigma0 - Sigma_inf) exp(-beta^T t) + Sigma_inf``."""
    e = tl.matrix_exponential(-np.asarray(beta), t)
    out = e @ (np.asarray(sigma0) - sigma_inf) @ e.T + sigma_inf
    return 0.5 * (out + out.T)


def covariance_trajectory(model: OUModel, sigma0, t):
    if t < 0:
        raise ValueError("t must be non-negative")
    sigma0 = np.atleast_2d(np.asarray(sigma0, dtype=float))
    if np.max(np.abs(sigma0 - sigma0.T)) > 1e-12 * max(1.0, np.max(np.abs(sigma0))):
        raise InvalidModel("initial covariance must be symmetric")
    sigma_inf = tl.solve_lyapunov(model.beta, model.d)
    return propagate_covariance(model.beta, sigma_inf, sigma0, t)
