"""Monte-Carlo sampling of the OU process, independent of the spectral solver."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..ou_core import OUModel
from .kernels import van_loan_covariance

__all__ = ["SampleStatistics", "sample_ou", "thread_count"]

CHUNK = 4096


@dataclass(frozen=True)
class SampleStatistics:
    mean: np.ndarray
    covariance: np.ndarray
    path_count: int
    mean_se: np.ndarray
    covariance_se: np.ndarray

    @property
    def standard_errors(self):
        return self.mean_se, self.covariance_se


def thread_count():
    """Worker count from ``OUL_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("OUL_THREADS", "1")))
    except ValueError:
        return 1


def _chunk_rng(seed, chunk):
    # stream keyed by (seed, chunk index) so scheduling never changes the draws
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(chunk)]))


def _exact_chunk(decay, chol, x0, size, seed, chunk):
    rng = _chunk_rng(seed, chunk)
    xi = rng.standard_normal((size, x0.shape[0]))
    return (decay @ x0)[None, :] + xi @ chol.T


def _euler_chunk(beta, sigma, x0, t, dt, size, seed, chunk):
    rng = _chunk_rng(seed, chunk)
    steps = int(round(t / dt))
    x = np.repeat(x0[None, :], size, axis=0)
    root = np.sqrt(dt)
    for _ in range(steps):
        xi = rng.standard_normal(x.shape)
        x = x - dt * x @ beta.T + root * xi @ sigma.T
    return x


def _psd_factor(cov):
    w, v = np.linalg.eigh(cov)
    return v * np.sqrt(np.clip(w, 0.0, None))


def sample_ou(model: OUModel, x0, t, paths, seed=0, scheme="exact", dt=None) -> SampleStatistics:
    """Sample ``x_t`` and return mean, covariance and their standard errors.

    ``scheme="exact"`` draws from the Gaussian transition law in one step;
    ``scheme="euler"`` integrates Euler-Maruyama with step ``dt`` (``t/dt``
    is rounded to an integer step count).
    """
    if paths < 2:
        raise ValueError("need at least two paths")
    if t < 0:
        raise ValueError("t must be non-negative")
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    if x0.shape != (model.dim,):
        raise ValueError(f"x0 must have length {model.dim}")
    sizes = [min(CHUNK, paths - start) for start in range(0, paths, CHUNK)]
    if scheme == "exact":
        decay, cov = van_loan_covariance(model.beta, model.d, t)
        chol = _psd_factor(cov)
        jobs = [(_exact_chunk, (decay, chol, x0, n, seed, c)) for c, n in enumerate(sizes)]
    elif scheme == "euler":
        if dt is None or dt <= 0:
            raise ValueError("euler scheme needs dt > 0")
        sigma = model.noise_matrix()
        jobs = [(_euler_chunk, (model.beta, sigma, x0, t, dt, n, seed, c)) for c, n in enumerate(sizes)]
    else:
        raise ValueError(f"unknown scheme {scheme!r}")

    workers = min(thread_count(), len(jobs))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda job: job[0](*job[1]), jobs))
    else:
        parts = [fn(*args) for fn, args in jobs]
    samples = np.concatenate(parts, axis=0)
    return _statistics(samples)


def _statistics(samples):
    n = samples.shape[0]
    mean = samples.mean(axis=0)
    centered = samples - mean
    products = centered[:, :, None] * centered[:, None, :]
    cov = products.sum(axis=0) / (n - 1)
    mean_se = np.sqrt(np.diag(cov) / n)
    cov_se = np.sqrt(products.var(axis=0, ddof=1) / n)
    return SampleStatistics(mean, 0.5 * (cov + cov.T), n, mean_se, cov_se)
