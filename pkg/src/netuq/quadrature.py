"""Tensor-product Gauss-Legendre quadrature for the uniform measure.

Weights are normalized against the uniform probability density, so every
rule integrates the constant function to exactly one.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DEFAULT_POINT_CAP = 1_000_000

_NEWTON_TOL = 1e-15
_NEWTON_MAX_ITER = 100


class ResourceLimitError(RuntimeError):
    """Raised when a requested tensor rule exceeds the point-count cap."""


def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and probability weights of the ``n``-point Gauss-Legendre rule.

    Roots of the degree-``n`` Legendre polynomial are located by Newton
    iteration on the three-term recurrence starting from Chebyshev-angle
    guesses; only half the roots are computed and the rule is mirrored so
    symmetry is exact.  Weights sum to one (density ``1/2`` on ``[-1, 1]``).

    Parameters
    ----------
    n : int
        Number of points, at least 1.

    Returns
    -------
    tuple of np.ndarray
        ``(nodes, weights)`` with nodes ascending in ``(-1, 1)``.
    """
    if n < 1:
        raise ValueError(f"need at least one quadrature point, got {n}")
    m = (n + 1) // 2
    z = np.cos(np.pi * (np.arange(m) + 0.75) / (n + 0.5))

    def _legendre_pair(x):
        p0, p1 = np.ones_like(x), x.copy()
        for k in range(1, n):
            p0, p1 = p1, ((2 * k + 1) * x * p1 - k * p0) / (k + 1)
        return p0, p1  # (P_{n-1}, P_n)

    for _ in range(_NEWTON_MAX_ITER):
        p_prev, p_n = _legendre_pair(z)
        dp = n * (z * p_n - p_prev) / (z * z - 1.0)
        step = p_n / dp
        z = z - step
        if np.all(np.abs(step) <= _NEWTON_TOL):
            break
    else:  # pragma: no cover - the iteration converges in a handful of steps
        raise RuntimeError("Gauss-Legendre root search did not converge")

    p_prev, p_n = _legendre_pair(z)
    dp = n * (z * p_n - p_prev) / (z * z - 1.0)
    half_weights = 1.0 / ((1.0 - z * z) * dp * dp)

    nodes = np.empty(n)
    weights = np.empty(n)
    nodes[:m] = -z          # z is descending, so -z fills ascending from -1
    nodes[n - m:] = z[::-1]
    weights[:m] = half_weights
    weights[n - m:] = half_weights[::-1]
    return nodes, weights


@dataclass(frozen=True)
class QuadratureGrid:
    """Tensor Gauss-Legendre rule on ``[-1, 1]^dim``.

    Attributes
    ----------
    points : np.ndarray
        Node coordinates, shape ``(npoints, dim)``, last axis fastest.
    weights : np.ndarray
        Probability weights, shape ``(npoints,)``, summing to one.
    points_per_dim : int
        Number of nodes of the underlying univariate rule.
    """

    points: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    points_per_dim: int

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def npoints(self) -> int:
        return self.points.shape[0]


def tensor_gauss(dim: int, points_per_dim: int,
                 point_cap: int = DEFAULT_POINT_CAP) -> QuadratureGrid:
    """Full tensor product of a univariate Gauss-Legendre rule.

    Parameters
    ----------
    dim : int
        Number of coordinates, at least 1.
    points_per_dim : int
        Univariate rule size, at least 1; the grid has
        ``points_per_dim ** dim`` points.
    point_cap : int
        Upper bound on the total point count.

    Raises
    ------
    ResourceLimitError
        If the requested grid would exceed ``point_cap`` points.
    """
    if dim < 1:
        raise ValueError(f"dimension must be at least 1, got {dim}")
    if points_per_dim < 1:
        raise ValueError(
            f"points_per_dim must be at least 1, got {points_per_dim}")
    total = points_per_dim ** dim
    if total > point_cap:
        raise ResourceLimitError(
            f"tensor rule with {points_per_dim}^{dim} = {total} points "
            f"exceeds the cap of {point_cap}")
    nodes, w1 = gauss_legendre(points_per_dim)
    mesh = np.meshgrid(*([nodes] * dim), indexing="ij")
    points = np.stack([axis.ravel() for axis in mesh], axis=1)
    weights = w1
    for _ in range(dim - 1):
        weights = np.multiply.outer(weights, w1)
    return QuadratureGrid(points=points, weights=weights.ravel(),
                          points_per_dim=points_per_dim)
