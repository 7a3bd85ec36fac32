"""Truncated number-basis master equation: the brute-force quantum reference.

The Liouvillian is assembled directly from the Hamiltonian couplings and the
raw bath rows, vectorized row-major so that ``vec(A rho B) = (A kron B^T) vec(rho)``.
It shares no code with the phase-space solver.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from math import lgamma

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ..errors import AmplitudeTooLarge, CutoffTooLarge, HermiticityDrift, TailMass
from ..lindblad_core import LindbladModel

__all__ = [
    "FockLiouvillian",
    "build_fock_liouvillian",
    "ladder_operators",
    "steady_state",
    "evolve_density",
    "coherent_state",
    "coherent_density",
    "thermal_state",
    "q_function",
    "mean_occupation",
]

log = logging.getLogger(__name__)

MAX_CUTOFF = {1: 60, 2: 10}
DENSE_LIMIT = 4096


@dataclass(frozen=True)
class FockLiouvillian:
    n_modes: int
    n_max: int
    matrix: sp.csr_matrix

    @property
    def dim(self):
        return (self.n_max + 1) ** self.n_modes

    def dense(self):
        return self.matrix.toarray()

    def trace_row(self):
        """Row vector of the trace functional on row-major ``vec(rho)``."""
        return np.eye(self.dim).reshape(-1)

    def apply(self, rho):
        return (self.matrix @ np.asarray(rho).reshape(-1)).reshape(self.dim, self.dim)


def ladder_operators(n_modes, n_max):
    """Sparse annihilation operators on the truncated tensor-product space."""
    d = n_max + 1
    a1 = sp.diags(np.sqrt(np.arange(1, d, dtype=float)), 1, shape=(d, d), format="csr")
    eye = sp.identity(d, format="csr")
    ops = []
    for m in range(n_modes):
        factors = [a1 if j == m else eye for j in range(n_modes)]
        op = factors[0]
        for f in factors[1:]:
            op = sp.kron(op, f, format="csr")
        ops.append(op.astype(complex))
    return ops


def build_fock_liouvillian(model: LindbladModel, n_max: int) -> FockLiouvillian:
    n = model.n_modes
    if n not in MAX_CUTOFF or n_max > MAX_CUTOFF[n] or n_max < 1:
        limit = MAX_CUTOFF.get(n)
        raise CutoffTooLarge(f"{n}-mode cutoff {n_max} outside the supported range (max {limit})")
    a = ladder_operators(n, n_max)
    ad = [op.conj().T.tocsr() for op in a]
    dim = (n_max + 1) ** n
    eye = sp.identity(dim, dtype=complex, format="csr")

    ham = sp.csr_matrix((dim, dim), dtype=complex)
    for i in range(n):
        for j in range(n):
            if model.h[i, j] != 0:
                ham = ham + model.h[i, j] * (ad[i] @ a[j])
            if model.k[i, j] != 0:
                ham = ham + 0.5 * (model.k[i, j] * (ad[i] @ ad[j]) + np.conj(model.k[i, j]) * (a[i] @ a[j]))

    gen = -1j * (sp.kron(ham, eye) - sp.kron(eye, ham.T))
    for l_row, p_row in model.baths:
        jump = sp.csr_matrix((dim, dim), dtype=complex)
        for m in range(n):
            if l_row[m] != 0:
                jump = jump + l_row[m] * a[m]
            if p_row[m] != 0:
                jump = jump + np.conj(p_row[m]) * ad[m]
        jd = jump.conj().T.tocsr()
        number = (jd @ jump).tocsr()
        gen = gen + sp.kron(jump, jump.conj()) - 0.5 * sp.kron(number, eye) - 0.5 * sp.kron(eye, number.T)
    gen = sp.csr_matrix(gen)
    gen.eliminate_zeros()
    return FockLiouvillian(n, n_max, gen)


def steady_state(liouv: FockLiouvillian):
    """Null vector of the Liouvillian normalized to unit trace."""
    dim = liouv.dim
    mat = liouv.matrix.tolil(copy=True)
    tr = liouv.trace_row()
    # replace the first diagonal-population equation by the trace condition
    mat[0, :] = tr
    rhs = np.zeros(dim * dim, dtype=complex)
    rhs[0] = 1.0
    vec = spla.spsolve(mat.tocsc(), rhs)
    rho = vec.reshape(dim, dim)
    return 0.5 * (rho + rho.conj().T)


def _top_population(rho, n_modes, n_max):
    d = n_max + 1
    pops = np.real(np.diag(rho)).reshape([d] * n_modes)
    total = 0.0
    for m in range(n_modes):
        total += float(np.sum(np.take(pops, d - 1, axis=m)))
    return total


def evolve_density(liouv: FockLiouvillian, rho0, t):
    """``exp(L t) vec(rho0)``, dense exponential for small spaces, ``expm_multiply`` otherwise."""
    rho0 = np.asarray(rho0, dtype=complex)
    dim = liouv.dim
    if rho0.shape != (dim, dim):
        raise ValueError(f"rho0 must be {dim}x{dim}")
    if np.max(np.abs(rho0 - rho0.conj().T)) > 1e-10:
        raise ValueError("rho0 must be Hermitian")
    if abs(np.trace(rho0) - 1.0) > 1e-8:
        raise ValueError("rho0 must have unit trace")
    if np.min(np.linalg.eigvalsh(0.5 * (rho0 + rho0.conj().T))) < -1e-10:
        raise ValueError("rho0 must be positive semi-definite")
    if _top_population(rho0, liouv.n_modes, liouv.n_max) > 1e-8:
        raise TailMass("initial state populates the cutoff level")
    if t < 0:
        raise ValueError("t must be non-negative")
    if t == 0:
        return rho0.copy()
    vec = rho0.reshape(-1)
    if dim * dim <= DENSE_LIMIT:
        out = scipy.linalg.expm(liouv.dense() * t) @ vec
    else:
        out = spla.expm_multiply(liouv.matrix * t, vec)
    rho = out.reshape(dim, dim)
    drift = float(np.max(np.abs(rho - rho.conj().T)))
    if drift > 1e-7:
        raise HermiticityDrift(f"Hermiticity deviation {drift:.3g}")
    if drift > 0:
        log.debug("symmetrizing density matrix, deviation %.3g", drift)
    rho = 0.5 * (rho + rho.conj().T)
    tr = np.trace(rho).real
    if abs(tr - 1.0) > 1e-8:
        raise TailMass(f"trace drifted to {tr:.12g}")
    leak = _top_population(rho, liouv.n_modes, liouv.n_max)
    if leak > 1e-6:
        raise TailMass(f"cutoff population {leak:.3g} exceeds 1e-6")
    return rho


def coherent_state(alpha, n_max):
    """Truncated coherent amplitudes ``e^{-|a|^2/2} a^n / sqrt(n!)`` (single mode)."""
    alpha = complex(alpha)
    n = np.arange(n_max + 1)
    if alpha == 0:
        out = np.zeros(n_max + 1, dtype=complex)
        out[0] = 1.0
        return out
    log_mag = -0.5 * abs(alpha) ** 2 + n * np.log(abs(alpha)) - 0.5 * np.array([lgamma(k + 1) for k in n])
    return np.exp(log_mag) * np.exp(1j * n * np.angle(alpha))


def coherent_density(alphas, n_max):
    """Projector on the product coherent state; raises :class:`TailMass` if truncation loses > 1e-8."""
    vec = np.ones(1, dtype=complex)
    for a in np.atleast_1d(alphas):
        c = coherent_state(a, n_max)
        vec = np.kron(vec, c)
    lost = 1.0 - np.vdot(vec, vec).real
    if lost > 1e-8:
        raise TailMass(f"coherent state loses {lost:.3g} beyond the cutoff")
    vec = vec / np.linalg.norm(vec)
    return np.outer(vec, vec.conj())


def thermal_state(nbar, n_max):
    """Single-mode Gibbs state ``nbar^n / (nbar + 1)^(n+1)``, renormalized after truncation."""
    n = np.arange(n_max + 1)
    p = (nbar / (nbar + 1.0)) ** n / (nbar + 1.0)
    return np.diag(p / p.sum()).astype(complex)


def mean_occupation(rho, mode=0, n_modes=1):
    dim = rho.shape[0]
    d = round(dim ** (1.0 / n_modes))
    pops = np.real(np.diag(rho)).reshape([d] * n_modes)
    marginal = pops.sum(axis=tuple(j for j in range(n_modes) if j != mode))
    return float(np.dot(np.arange(d), marginal))


def q_function(rho, alpha, n_modes=1):
    """Husimi function ``<alpha|rho|alpha> / pi^N`` at points ``alpha`` of shape ``(..., N)``."""
    rho = np.asarray(rho, dtype=complex)
    dim = rho.shape[0]
    d = round(dim ** (1.0 / n_modes))
    n_max = d - 1
    alpha = np.asarray(alpha, dtype=complex)
    if n_modes == 1 and (alpha.ndim == 0 or alpha.shape[-1] != 1):
        alpha = alpha[..., None]
    shape = alpha.shape[:-1]
    pts = alpha.reshape(-1, n_modes)
    if np.max(np.abs(pts) ** 2, initial=0.0) > n_max:
        raise AmplitudeTooLarge(f"|alpha|^2 exceeds the cutoff {n_max}")
    vecs = np.ones((pts.shape[0], 1), dtype=complex)
    for m in range(n_modes):
        c = np.stack([coherent_state(a, n_max) for a in pts[:, m]])
        vecs = (vecs[:, :, None] * c[:, None, :]).reshape(pts.shape[0], -1)
    q = np.einsum("pi,ij,pj->p", vecs.conj(), rho, vecs).real / np.pi**n_modes
    return q.reshape(shape)
