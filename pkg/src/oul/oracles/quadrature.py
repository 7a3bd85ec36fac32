"""Gauss-Hermite rules for the standard normal weight."""
from __future__ import annotations

import numpy as np

from ..errors import OrderOutOfRange

__all__ = ["gauss_hermite", "tensor_rule"]


def gauss_hermite(order: int):
    """Nodes and weights for ``E[f(X)]``, ``X ~ N(0, 1)``.

    Exact for polynomials of degree ``2 * order - 1``; weights sum to one.
    """
    order = int(order)
    if not 2 <= order <= 128:
        raise OrderOutOfRange(f"order must lie in [2, 128], got {order}")
    nodes, weights = np.polynomial.hermite_e.hermegauss(order)
    return nodes, weights / np.sqrt(2.0 * np.pi)


def tensor_rule(order: int, dim: int):
    """Tensor-product rule on ``R^dim``; returns ``(points (M, dim), weights (M,))``."""
    nodes, weights = gauss_hermite(order)
    grids = np.meshgrid(*([nodes] * dim), indexing="ij")
    wgrids = np.meshgrid(*([weights] * dim), indexing="ij")
    points = np.stack([g.ravel() for g in grids], axis=-1)
    w = np.prod(np.stack([g.ravel() for g in wgrids], axis=-1), axis=-1)
    return points, w
