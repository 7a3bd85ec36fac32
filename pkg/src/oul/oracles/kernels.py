"""Closed-form reference values computed without the spectral machinery."""
from __future__ import annotations

from math import factorial

import numpy as np
import scipy.linalg

__all__ = ["van_loan_covariance", "exact_ou_kernel", "mehler_series"]


def van_loan_covariance(beta, d, t):
    """``(exp(-beta t), Sigma(t))`` for the OU process started at a point.

    ``Sigma(t) = int_0^t exp(-beta s) 2D exp(-beta^T s) ds`` is read off the
    upper-right block of one block-matrix exponential.
    """
    beta = np.atleast_2d(np.asarray(beta, dtype=float))
    d = np.atleast_2d(np.asarray(d, dtype=float))
    n = beta.shape[0]
    block = np.block([[-beta, 2.0 * d], [np.zeros((n, n)), beta.T]]) * t
    e = scipy.linalg.expm(block)
    decay = e[:n, :n]
    cov = e[:n, n:] @ decay.T
    return decay, 0.5 * (cov + cov.T)


def exact_ou_kernel(beta, d, x, x0, t):
    """Gaussian transition density ``p(x, t | x0)``; ``x`` has shape ``(..., N)``."""
    decay, cov = van_loan_covariance(beta, d, t)
    x = np.asarray(x, dtype=float)
    mean = decay @ np.asarray(x0, dtype=float)
    diff = x - mean
    n = cov.shape[0]
    sol = np.linalg.solve(cov, diff.reshape(-1, n).T).T.reshape(diff.shape)
    quad = np.sum(diff * sol, axis=-1)
    return np.exp(-0.5 * quad) / np.sqrt((2.0 * np.pi) ** n * np.linalg.det(cov))


def mehler_series(rho, x, y, terms: int = 30):
    """Partial sum ``sum_{n=0}^{terms} rho^n / n! He_n(x) He_n(y)`` via ``hermeval``."""
    herm = np.polynomial.hermite_e
    total = 0.0
    for n in range(terms + 1):
        unit = np.zeros(n + 1)
        unit[n] = 1.0
        total = total + rho**n / factorial(n) * herm.hermeval(x, unit) * herm.hermeval(y, unit)
    return total
