"""Central-difference application of Fokker-Planck operators at scattered points."""
from __future__ import annotations

import numpy as np

from ..errors import GridTooCoarse

__all__ = ["apply_fokker_planck", "wirtinger_map"]

MAX_STEP = 0.05


def wirtinger_map(n_modes):
    """Rows express ``d/d alpha_m`` and ``d/d alpha*_m`` in the real directions ``(x, y)``.

    ``d_alpha = (d_x - i d_y) / 2`` and ``d_alpha* = (d_x + i d_y) / 2``.
    """
    e = np.eye(n_modes)
    return 0.5 * np.block([[e, -1j * e], [e, 1j * e]])


def _real_points(points, complex_coords):
    if complex_coords:
        return np.concatenate([points.real, points.imag], axis=-1)
    return points


def _from_real(u, n, complex_coords):
    if complex_coords:
        return u[..., :n] + 1j * u[..., n:]
    return u


def apply_fokker_planck(f, points, beta, d, h=1e-3, direction="forward", complex_coords=False):
    """Apply a Fokker-Planck operator to ``f`` at ``points`` by central differences.

    ``forward``: ``sum_ij d_i(beta_ij z_j f) + sum_ij D_ij d_i d_j f`` with the
    drift in divergence form. ``adjoint``: ``-sum_i (beta z)_i d_i f + sum_ij D_ij d_i d_j f``.

    For ``complex_coords=True`` the points are complex ``alpha`` of shape
    ``(M, N)``, ``z = (alpha, alpha*)`` and ``d_i`` are Wirtinger derivatives;
    ``beta`` and ``d`` are then ``2N x 2N``. Errors are ``O(h^2)``.
    """
    if h > MAX_STEP:
        raise GridTooCoarse(f"step {h} exceeds {MAX_STEP}")
    if direction not in ("forward", "adjoint"):
        raise ValueError(f"direction must be 'forward' or 'adjoint', not {direction!r}")
    points = np.atleast_2d(np.asarray(points))
    n = points.shape[-1]
    beta = np.asarray(beta)
    d = np.asarray(d)
    u0 = _real_points(points, complex_coords)
    dim = u0.shape[-1]
    cmap = wirtinger_map(n) if complex_coords else np.eye(dim)

    def coords(u):
        z = _from_real(u, n, complex_coords)
        return np.concatenate([z, z.conj()], axis=-1) if complex_coords else z

    def fu(u):
        return np.asarray(f(_from_real(u, n, complex_coords)))

    def shifted(*moves):
        u = u0.copy()
        for axis, step in moves:
            u[..., axis] += step
        return u

    f0 = fu(u0)
    # real-direction second derivatives, symmetric stencil
    second = np.empty((dim, dim) + f0.shape, dtype=np.result_type(f0, complex))
    for a in range(dim):
        second[a, a] = (fu(shifted((a, h))) - 2.0 * f0 + fu(shifted((a, -h)))) / h**2
        for b in range(a + 1, dim):
            val = (
                fu(shifted((a, h), (b, h)))
                - fu(shifted((a, h), (b, -h)))
                - fu(shifted((a, -h), (b, h)))
                + fu(shifted((a, -h), (b, -h)))
            ) / (4.0 * h**2)
            second[a, b] = second[b, a] = val
    diffusion_term = np.einsum("ij,ia,jb,ab...->...", d, cmap, cmap, second)

    if direction == "forward":
        # d_i (beta z)_i f, differentiating the flux in each real direction
        drift_term = 0.0
        for a in range(dim):
            up = shifted((a, h))
            dn = shifted((a, -h))
            flux_up = (coords(up) @ beta.T) * fu(up)[..., None]
            flux_dn = (coords(dn) @ beta.T) * fu(dn)[..., None]
            deriv = (flux_up - flux_dn) / (2.0 * h)
            drift_term = drift_term + deriv @ cmap[:, a]
    else:
        grad = np.stack([(fu(shifted((a, h))) - fu(shifted((a, -h)))) / (2.0 * h) for a in range(dim)], axis=-1)
        wgrad = grad @ cmap.T
        drift_term = -np.sum((coords(u0) @ beta.T) * wgrad, axis=-1)
    out = drift_term + diffusion_term
    if not complex_coords and np.isrealobj(f0) and np.isrealobj(beta) and np.isrealobj(d):
        out = np.real(out)
    return out
