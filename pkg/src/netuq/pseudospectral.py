"""Pseudospectral projection: discrete inner products against the basis.

With ``Psi`` the basis evaluation matrix on a quadrature grid and ``W`` the
diagonal weight matrix, the coefficient matrix of a sampled quantity ``h``
is ``Psi^T W h``; on a grid that integrates products of basis functions
exactly this is the orthogonal projection onto the spanned polynomial
space.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .chaos import TensorBasis, evaluate_basis


def project(samples: np.ndarray, psi: np.ndarray,
            weights: np.ndarray) -> np.ndarray:
    """Discrete projection of grid samples onto the basis.

    Parameters
    ----------
    samples : np.ndarray
        Shape ``(npoints, nout)`` or ``(npoints,)``.
    psi : np.ndarray
        Basis evaluation matrix, shape ``(npoints, nbasis)``.
    weights : np.ndarray
        Quadrature weights, shape ``(npoints,)``.

    Returns
    -------
    np.ndarray
        Coefficient matrix of shape ``(nbasis, nout)``; one output column
        per sample column.
    """
    h = np.asarray(samples, dtype=float)
    squeeze = h.ndim == 1
    if squeeze:
        h = h[:, None]
    if h.shape[0] != psi.shape[0]:
        raise ValueError(
            f"sample rows ({h.shape[0]}) must match grid size ({psi.shape[0]})")
    coeffs = psi.T @ (weights[:, None] * h)
    return coeffs[:, 0] if squeeze else coeffs


def evaluate_expansion(coeffs: np.ndarray, psi: np.ndarray) -> np.ndarray:
    """Evaluate a coefficient matrix at the points underlying ``psi``."""
    return psi @ coeffs


def moments(coeffs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Mean and variance implied by an orthonormal coefficient matrix.

    The zeroth coefficient is the mean; the variance is the sum of squares
    of all remaining coefficients.
    """
    c = np.asarray(coeffs, dtype=float)
    squeeze = c.ndim == 1
    if squeeze:
        c = c[:, None]
    mean = c[0].copy()
    variance = np.sum(c[1:] ** 2, axis=0)
    if squeeze:
        return mean[()] if mean.ndim == 0 else mean[0], variance[0]
    return mean, variance


@dataclass
class SpectralCoefficients:
    """A chaos expansion: basis plus coefficient matrix.

    Attributes
    ----------
    basis : TensorBasis
    coeffs : np.ndarray
        Shape ``(basis.size, nout)``.
    """

    basis: TensorBasis
    coeffs: np.ndarray = field(repr=False)

    @classmethod
    def from_samples(cls, basis: TensorBasis, samples: np.ndarray,
                     psi: np.ndarray, weights: np.ndarray) -> "SpectralCoefficients":
        c = project(samples, psi, weights)
        if c.ndim == 1:
            c = c[:, None]
        return cls(basis=basis, coeffs=c)

    @property
    def mean(self) -> np.ndarray:
        return self.coeffs[0].copy()

    @property
    def variance(self) -> np.ndarray:
        return np.sum(self.coeffs[1:] ** 2, axis=0)

    @property
    def std(self) -> np.ndarray:
        return np.sqrt(self.variance)

    def __call__(self, points: np.ndarray) -> np.ndarray:
        """Evaluate the expansion at arbitrary points in the cube."""
        return evaluate_basis(self.basis, points) @ self.coeffs
