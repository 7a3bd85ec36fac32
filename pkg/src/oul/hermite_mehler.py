"""Probabilist Hermite polynomials, multi-index combinatorics and Mehler's kernel."""
from __future__ import annotations

import itertools
from math import comb, factorial

import numpy as np

from .errors import OrderTooLarge, PartsMismatch, RhoTooCloseToOne

__all__ = [
    "MAX_HERMITE_ORDER",
    "MAX_GENERALIZED_ORDER",
    "hermite_prob",
    "hermite_table",
    "compositions",
    "multi_indices",
    "multinomial",
    "generalized_hermite",
    "mehler_kernel",
    "hermite_expansion",
    "evaluate_expansion",
]

MAX_HERMITE_ORDER = 60
MAX_GENERALIZED_ORDER = 30


def hermite_table(n_max, x):
    """Stack ``[H_0(x), ..., H_{n_max}(x)]`` along a new leading axis."""
    if n_max > MAX_HERMITE_ORDER:
        raise OrderTooLarge(f"Hermite order {n_max} exceeds {MAX_HERMITE_ORDER}")
    x = np.asarray(x)
    dtype = np.result_type(x, float)
    out = np.empty((n_max + 1,) + x.shape, dtype=dtype)
    out[0] = 1.0
    if n_max >= 1:
        out[1] = x
    for n in range(1, n_max):
        out[n + 1] = x * out[n] - n * out[n - 1]
    return out


def hermite_prob(n, x):
    """``He_n(x)`` via the three-term recurrence; ``x`` may be complex or an array."""
    if n < 0:
        raise ValueError("order must be non-negative")
    out = hermite_table(n, x)[n]
    return out[()] if out.ndim == 0 else out


def compositions(target, parts):
    """All ways to write ``target`` as an ordered sum of ``parts`` non-negative integers.

    Returned in lexicographic order, e.g. ``compositions(2, 2)`` is
    ``[(0, 2), (1, 1), (2, 0)]``.
    """
    if parts < 1:
        raise ValueError("parts must be >= 1")
    if target < 0:
        raise ValueError("target must be non-negative")
    if parts == 1:
        return [(target,)]
    out = []
    for first in range(target + 1):
        for rest in compositions(target - first, parts - 1):
            out.append((first,) + rest)
    return out


def multi_indices(n, max_total_order):
    """Multi-indices of length ``n`` with ``|mu| <= max_total_order``, graded-lex order."""
    return [mu for order in range(max_total_order + 1) for mu in compositions(order, n)]


def multinomial(mu_i, parts):
    """Exact ``mu_i! / (k_1! ... k_N!)``."""
    parts = tuple(int(k) for k in parts)
    if any(k < 0 for k in parts) or sum(parts) != mu_i:
        raise PartsMismatch(f"parts {parts} do not sum to {mu_i}")
    out = factorial(mu_i)
    for k in parts:
        out //= factorial(k)
    return out


def generalized_hermite(u, m, n, x, y):
    """Two-index Hermite polynomial built from the entries of a 2x2 matrix ``u``.

    ``sum_k sum_j C(m,k) C(n,j) u11^k u12^(m-k) u21^j u22^(n-j) H_{k+j}(x) H_{m+n-k-j}(y)``;
    for ``u`` the identity this is ``H_m(x) H_n(y)``.
    """
    if max(m, n) > MAX_GENERALIZED_ORDER:
        raise OrderTooLarge(f"generalized Hermite order ({m}, {n}) exceeds {MAX_GENERALIZED_ORDER}")
    u = np.asarray(u)
    hx = hermite_table(m + n, x)
    hy = hermite_table(m + n, y)
    total = 0.0
    for k in range(m + 1):
        for j in range(n + 1):
            coeff = comb(m, k) * comb(n, j)
            weight = u[0, 0] ** k * u[0, 1] ** (m - k) * u[1, 0] ** j * u[1, 1] ** (n - j)
            total = total + coeff * weight * hx[k + j] * hy[m + n - k - j]
    return total


def mehler_kernel(rho, x, y):
    """Closed form of ``sum_n rho^n / n! H_n(x) H_n(y)`` for ``|rho| < 1``.

    The prefactor is ``(1 - rho^2)^(-1/2)`` on the principal branch, which is
    continuous on the unit disk because ``Re(1 - rho^2) > 0`` there.
    """
    rho = complex(rho) if np.iscomplexobj(rho) else rho
    one_minus = 1.0 - rho * rho
    if abs(rho) >= 1.0 or abs(one_minus) <= 1e-12:
        raise RhoTooCloseToOne(f"|rho| = {abs(rho):.6g} leaves the unit disk or |1 - rho^2| is ~0")
    x = np.asarray(x)
    y = np.asarray(y)
    exponent = -(rho * rho * (x * x + y * y) - 2.0 * rho * x * y) / (2.0 * one_minus)
    out = np.exp(exponent) / np.sqrt(one_minus)
    return out[()] if out.ndim == 0 else out


def hermite_expansion(mu, a):
    """Collect the multinomial expansion of ``prod_i (sum_t a[i, t] D_t)^mu_i / sqrt(mu_i!)``.

    Returns a dict mapping the per-axis degree vector ``n`` (``n_t = sum_i k^i_t``)
    to its complex coefficient. Both eigenfunction families are sums of
    ``coeff * prod_t H_{n_t}(x'_t)`` over this dict.
    """
    mu = tuple(int(m) for m in mu)
    a = np.asarray(a)
    dim = a.shape[1]
    if a.shape[0] != len(mu):
        raise ValueError(f"multi-index length {len(mu)} does not match matrix rows {a.shape[0]}")
    if sum(mu) > MAX_HERMITE_ORDER:
        raise OrderTooLarge(f"total order {sum(mu)} exceeds {MAX_HERMITE_ORDER}")
    per_row = []
    for i, mu_i in enumerate(mu):
        norm = 1.0 / np.sqrt(float(factorial(mu_i)))
        terms = []
        for k in compositions(mu_i, dim):
            c = norm * multinomial(mu_i, k)
            for t, kt in enumerate(k):
                if kt:
                    c = c * a[i, t] ** kt
            if c != 0:
                terms.append((k, c))
        per_row.append(terms)
    out: dict[tuple, complex] = {}
    for combo in itertools.product(*per_row):
        degree = [0] * dim
        coeff = 1.0 + 0j
        for k, c in combo:
            coeff *= c
            for t, kt in enumerate(k):
                degree[t] += kt
        key = tuple(degree)
        out[key] = out.get(key, 0.0) + coeff
    return out


def evaluate_expansion(expansion, xprime):
    """Evaluate ``sum_n c_n prod_t H_{n_t}(x'_t)``; ``xprime`` has shape ``(..., dim)``."""
    xprime = np.asarray(xprime)
    if not expansion:
        return np.zeros(xprime.shape[:-1], dtype=complex)
    top = max(max(n) for n in expansion)
    tables = [hermite_table(top, xprime[..., t]) for t in range(xprime.shape[-1])]
    total = np.zeros(xprime.shape[:-1], dtype=complex)
    for degree, coeff in expansion.items():
        term = coeff
        for t, n_t in enumerate(degree):
            if n_t:
                term = term * tables[t][n_t]
        total = total + term
    return total
