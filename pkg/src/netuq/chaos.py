"""Total-degree multi-index sets and orthonormal tensor Legendre bases.

Basis functions are products of univariate Legendre polynomials rescaled to
unit norm against the uniform probability density on ``[-1, 1]`` (density
``1/2`` per coordinate), so the multivariate family is orthonormal in
``L2`` of the uniform measure on the cube ``[-1, 1]^dim``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np


def _compositions(total: int, parts: int):
    """Yield all nonnegative integer tuples of length ``parts`` summing to
    ``total``, with the leading coordinate descending."""
    if parts == 1:
        yield (total,)
        return
    for head in range(total, -1, -1):
        for rest in _compositions(total - head, parts - 1):
            yield (head,) + rest


def total_degree_indices(dim: int, max_degree: int) -> np.ndarray:
    """Multi-indices ``alpha`` with ``|alpha| <= max_degree``, graded order.

    Indices are listed degree block by degree block; inside a block they are
    ordered lexicographically with the leading coordinate most significant
    and descending.  The layout is deterministic, and the set for a lower
    ``max_degree`` is a prefix of the set for any higher one.

    Parameters
    ----------
    dim : int
        Number of coordinates, at least 1.
    max_degree : int
        Total-degree bound, at least 0.

    Returns
    -------
    np.ndarray
        Integer array of shape ``(count, dim)`` with
        ``count = comb(max_degree + dim, dim)``.
    """
    if dim < 1:
        raise ValueError(f"dimension must be at least 1, got {dim}")
    if max_degree < 0:
        raise ValueError(f"max_degree must be nonnegative, got {max_degree}")
    rows = []
    for degree in range(max_degree + 1):
        rows.extend(_compositions(degree, dim))
    return np.array(rows, dtype=np.int64)


def legendre_orthonormal(points: np.ndarray, max_degree: int) -> np.ndarray:
    """Evaluate the normalized Legendre family at univariate points.

    Column ``n`` holds ``sqrt(2n + 1) * P_n(points)`` where ``P_n`` is the
    standard Legendre polynomial; the scaling gives unit norm against the
    probability density ``1/2`` on ``[-1, 1]``.

    Parameters
    ----------
    points : np.ndarray
        Evaluation points, shape ``(npoints,)``.
    max_degree : int
        Highest polynomial degree.

    Returns
    -------
    np.ndarray
        Array of shape ``(npoints, max_degree + 1)``.
    """
    x = np.asarray(points, dtype=float)
    if x.ndim != 1:
        raise ValueError("points must be one-dimensional")
    y = np.empty((x.shape[0], max_degree + 1))
    y[:, 0] = 1.0
    if max_degree >= 1:
        y[:, 1] = x
    for n in range(1, max_degree):
        y[:, n + 1] = ((2 * n + 1) * x * y[:, n] - n * y[:, n - 1]) / (n + 1)
    y *= np.sqrt(2.0 * np.arange(max_degree + 1) + 1.0)
    return y


@dataclass(frozen=True)
class TensorBasis:
    """Orthonormal product-Legendre basis over a total-degree index set.

    Attributes
    ----------
    dim : int
        Number of random coordinates.
    max_degree : int
        Total-degree bound of the index set.
    indices : np.ndarray
        Multi-index array of shape ``(size, dim)`` in graded order.
    """

    dim: int
    max_degree: int
    indices: np.ndarray = field(repr=False)

    @classmethod
    def total_degree(cls, dim: int, max_degree: int) -> "TensorBasis":
        return cls(dim=dim, max_degree=max_degree,
                   indices=total_degree_indices(dim, max_degree))

    @property
    def size(self) -> int:
        """Number of basis functions, ``comb(max_degree + dim, dim)``."""
        return self.indices.shape[0]


def evaluate_basis(basis: TensorBasis, points: np.ndarray) -> np.ndarray:
    """Evaluate every basis function at every point.

    Parameters
    ----------
    basis : TensorBasis
    points : np.ndarray
        Array of shape ``(npoints, dim)``; a one-dimensional array is
        accepted when ``dim == 1``.

    Returns
    -------
    np.ndarray
        Evaluation matrix of shape ``(npoints, basis.size)``.

    Raises
    ------
    ValueError
        If the point array has the wrong width or any coordinate falls
        outside the closed cube ``[-1, 1]^dim``.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2 or pts.shape[1] != basis.dim:
        raise ValueError(
            f"points must have shape (npoints, {basis.dim}), got {pts.shape}")
    if pts.size and np.max(np.abs(pts)) > 1.0:
        raise ValueError("points must lie inside the closed cube [-1, 1]^dim")
    out = np.ones((pts.shape[0], basis.size))
    for d in range(basis.dim):
        table = legendre_orthonormal(pts[:, d], basis.max_degree)
        out *= table[:, basis.indices[:, d]]
    return out


def expected_size(dim: int, max_degree: int) -> int:
    """Cardinality of the total-degree index set, ``comb(max_degree + dim, dim)``."""
    return comb(max_degree + dim, dim)
