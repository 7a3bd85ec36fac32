"""Dense matrix services shared by the classical and quantum code paths.

Everything here uses the plain transpose, never the conjugate transpose:
the Lyapunov equation, the whitening factor and the symplectic condition are
all bilinear (not sesquilinear) once the drift and diffusion become complex.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    NearSingularPivot,
    NonDiagonalizable,
    NonFinite,
    NotSymmetric,
    SingularKroneckerSum,
    Unstable,
)

__all__ = [
    "EigenDecomposition",
    "eigendecompose",
    "solve_lyapunov",
    "whiten",
    "matrix_exponential",
    "kronecker_sum",
]

CONDITION_LIMIT = 1e8
STABILITY_MARGIN = 1e-12
PIVOT_TOL = 1e-12
SYMMETRY_TOL = 1e-12
# eigenvector-based exponentials lose roughly cond(P) * eps; above this we
# hand over to scaling-and-squaring
EXPM_EIG_CONDITION = 1e4


@dataclass(frozen=True)
class EigenDecomposition:
    values: np.ndarray
    right_vectors: np.ndarray
    inverse_vectors: np.ndarray
    condition: float


def _as_square(m, name="matrix"):
    m = np.atleast_2d(np.asarray(m))
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be square, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NonFinite(f"{name} has non-finite entries")
    return m


def _maxabs(m):
    return float(np.max(np.abs(m))) if np.size(m) else 0.0


def eigendecompose(m) -> EigenDecomposition:
    """Diagonalize ``m`` as ``P diag(values) P^-1``.

    Eigenvalues are sorted by real part, then imaginary part. Raises
    :class:`NonDiagonalizable` if the eigenvector matrix has condition number
    above 1e8.
    """
    m = _as_square(m)
    values, vectors = np.linalg.eig(m)
    order = np.lexsort((values.imag, values.real))
    values = values[order]
    vectors = vectors[:, order]
    cond = float(np.linalg.cond(vectors))
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise NonDiagonalizable(
            f"eigenvector matrix condition number {cond:.3g} exceeds {CONDITION_LIMIT:g}"
        )
    if np.isrealobj(m) and np.all(values.imag == 0):
        values = values.real
        vectors = vectors.real
    inverse = np.linalg.inv(vectors)
    return EigenDecomposition(values, vectors, inverse, cond)


def kronecker_sum(a):
    """``a ⊕ a = a ⊗ 1 + 1 ⊗ a``, acting on row-major vectorized matrices."""
    a = np.asarray(a)
    eye = np.eye(a.shape[0], dtype=a.dtype)
    return np.kron(a, eye) + np.kron(eye, a)


def check_stable(beta):
    """Raise :class:`Unstable` unless every eigenvalue has Re > 1e-12."""
    eig = np.linalg.eigvals(_as_square(beta, "beta"))
    worst = float(np.min(eig.real))
    if worst <= STABILITY_MARGIN:
        raise Unstable(f"drift matrix has an eigenvalue with real part {worst:.3g} <= 0")
    return eig


def solve_lyapunov(beta, d):
    """Solve ``beta @ S + S @ beta.T = 2 d`` through the Kronecker-sum system.

    The n^2 x n^2 dense solve is only meant for small n (a few modes).
    """
    beta = _as_square(beta, "beta")
    d = _as_square(d, "d")
    if beta.shape != d.shape:
        raise ValueError(f"shape mismatch: beta {beta.shape}, d {d.shape}")
    scale = max(1.0, _maxabs(d))
    if _maxabs(d - d.T) > SYMMETRY_TOL * scale:
        raise NotSymmetric("diffusion matrix is not symmetric (transpose sense)")
    check_stable(beta)

    n = beta.shape[0]
    dtype = np.result_type(beta, d, float)
    ksum = kronecker_sum(beta.astype(dtype))
    rhs = (2.0 * d).astype(dtype).reshape(n * n)
    if np.linalg.cond(ksum) > 1.0 / np.finfo(float).eps:
        raise SingularKroneckerSum("Kronecker sum of the drift matrix is numerically singular")
    try:
        sol = np.linalg.solve(ksum, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularKroneckerSum(str(exc)) from exc
    sigma = sol.reshape(n, n)
    return 0.5 * (sigma + sigma.T)


def _principal_sqrt(z):
    r = np.sqrt(complex(z))
    if r.real == 0.0 and r.imag < 0.0:
        r = -r
    return r


def _unconjugated_cholesky(s, tol):
    """Upper-triangular ``w`` with ``w.T @ w = s`` (no conjugation)."""
    n = s.shape[0]
    w = np.zeros((n, n), dtype=complex)
    for k in range(n):
        pivot = s[k, k] - np.sum(w[:k, k] ** 2)
        if abs(pivot) < tol:
            raise NearSingularPivot(f"pivot {k} has magnitude {abs(pivot):.3g}")
        w[k, k] = _principal_sqrt(pivot)
        for j in range(k + 1, n):
            w[k, j] = (s[k, j] - np.sum(w[:k, k] * w[:k, j])) / w[k, k]
    return w


def whiten(sigma, method="auto"):
    """Return ``w`` with ``w.T @ w = inv(sigma)``.

    ``method="cholesky"`` gives the upper-triangular unconjugated Cholesky
    factor and raises :class:`NearSingularPivot` on a vanishing pivot.
    ``method="sqrt"`` gives the symmetric principal square root of
    ``inv(sigma)``. ``"auto"`` (default) tries Cholesky first and falls back
    to the square root, which is what the off-diagonal covariances of
    phase-invariant quantum states need (their first pivot is exactly zero).
    """
    sigma = _as_square(sigma, "sigma")
    scale = max(1.0, _maxabs(sigma))
    if _maxabs(sigma - sigma.T) > SYMMETRY_TOL * scale:
        raise NotSymmetric("covariance is not symmetric (transpose sense)")
    if method not in ("auto", "cholesky", "sqrt"):
        raise ValueError(f"unknown whitening method {method!r}")
    try:
        s = np.linalg.inv(sigma)
    except np.linalg.LinAlgError as exc:
        raise NearSingularPivot("covariance is singular") from exc
    s = 0.5 * (s + s.T)
    tol = PIVOT_TOL * max(1.0, _maxabs(s))

    w = None
    if method in ("auto", "cholesky"):
        try:
            w = _unconjugated_cholesky(s.astype(complex), tol)
        except NearSingularPivot:
            if method == "cholesky":
                raise
    if w is None:
        w = scipy.linalg.sqrtm(s.astype(complex))
        w = 0.5 * (w + w.T)
        if not np.all(np.isfinite(w)):
            raise NearSingularPivot("symmetric square root of the precision matrix failed")

    resid = _maxabs(w.T @ w - s) / max(1.0, _maxabs(s))
    if resid > 1e-8:
        raise NearSingularPivot(f"whitening residual {resid:.3g} too large")
    if np.isrealobj(sigma) and _maxabs(w.imag) == 0.0:
        w = w.real
    return w


def matrix_exponential(m, t=1.0):
    """``exp(m t)``; eigen-decomposition when well conditioned, else Padé."""
    m = _as_square(m)
    n = m.shape[0]
    if t == 0:
        return np.eye(n, dtype=m.dtype if np.iscomplexobj(m) else float)
    out = None
    try:
        eig = eigendecompose(m)
    except NonDiagonalizable:
        eig = None
    if eig is not None and eig.condition <= EXPM_EIG_CONDITION:
        out = (eig.right_vectors * np.exp(eig.values * t)) @ eig.inverse_vectors
    else:
        out = scipy.linalg.expm(m * t)
    if not np.all(np.isfinite(out)):
        raise NonFinite("matrix exponential overflowed")
    if np.isrealobj(m):
        out = out.real
    return out
