"""Reduced bases of intermediate variables and sparsified quadrature.

When a sampled quantity is a smooth function of a few intermediate
variables ``y`` (rather than of all random inputs directly), a low-order
polynomial basis in ``y`` spans it well even though ``y`` itself may be a
high-dimensional polynomial in the inputs.  Orthonormalizing monomials of
the ``y`` samples against the quadrature weights gives such a basis
``Phi``; a new nonnegative weight vector that preserves the discrete
orthonormality of ``Phi`` while being zero at almost every grid point is
then found as a basic feasible solution of a small linear program.
Projections through the pair ``(Phi, u*)`` only ever touch the grid points
carrying a nonzero weight.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from math import comb

import numpy as np

from .chaos import total_degree_indices
from .lp import InfeasibleProgramError, LPSolution, StandardFormLP, phase_one_bfs

DEFAULT_QR_TOL = 1e-12
ORTHOGONALITY_THRESHOLD = 1e-8
_MIN_SCALED_DIAG = 1e-14


class RankDeficiencyError(RuntimeError):
    """A column of the candidate basis is numerically dependent.

    ``column`` holds the offending column index so callers can prune it
    and retry with a smaller candidate set.
    """

    def __init__(self, message: str, column: int | None = None):
        super().__init__(message)
        self.column = column


class ReductionFailureError(RuntimeError):
    """No acceptable sparse weight vector could be constructed."""


@dataclass(frozen=True)
class MonomialMatrix:
    """Monomials of intermediate-variable samples over a total-degree set.

    Attributes
    ----------
    values : np.ndarray
        Shape ``(npoints, nterms)``; column ``t`` is
        ``prod_d y_d ** exponents[t, d]``.
    exponents : np.ndarray
        Shape ``(nterms, nvars)``, graded order.
    """

    values: np.ndarray = field(repr=False)
    exponents: np.ndarray = field(repr=False)

    @property
    def nterms(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class ReducedBasis:
    """Weighted-orthonormal factorization ``Y = Phi @ rtri``.

    ``Phi`` has ``Phi^T diag(weights) Phi = I`` and ``rtri`` is upper
    triangular with positive diagonal.
    """

    phi: np.ndarray = field(repr=False)
    rtri: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    @property
    def nterms(self) -> int:
        return self.phi.shape[1]


@dataclass(frozen=True)
class ModifiedQuadrature:
    """Sparse nonnegative reweighting of a quadrature rule.

    Attributes
    ----------
    u_star : np.ndarray
        Nonnegative weights over the full grid, zero almost everywhere.
    rank_used : int
        Number of orthogonality constraints enforced.
    nonzero_count : int
        Number of strictly positive entries of ``u_star``.
    orthogonality_error : float
        ``max |I - Phi^T diag(u_star) Phi|`` over all entries.
    qr_tol : float
        Rank tolerance actually used (after any retry).
    """

    u_star: np.ndarray = field(repr=False)
    rank_used: int
    nonzero_count: int
    orthogonality_error: float
    qr_tol: float

    @property
    def support(self) -> np.ndarray:
        """Indices of the grid points carrying nonzero weight, ascending."""
        return np.flatnonzero(self.u_star)


def monomial_matrix(samples: np.ndarray, max_degree: int) -> MonomialMatrix:
    """All monomials of the sample columns up to a total degree.

    Powers are built by repeated multiplication (no logarithms), so exact
    zeros and signs survive.

    Parameters
    ----------
    samples : np.ndarray
        Intermediate-variable samples, shape ``(npoints, nvars)`` or
        ``(npoints,)`` for a single variable.
    max_degree : int
        Total-degree bound of the monomial set.
    """
    y = np.asarray(samples, dtype=float)
    if y.ndim == 1:
        y = y[:, None]
    if y.ndim != 2:
        raise ValueError("samples must be a matrix of shape (npoints, nvars)")
    npoints, nvars = y.shape
    exponents = total_degree_indices(nvars, max_degree)
    powers = []
    for d in range(nvars):
        table = np.empty((npoints, max_degree + 1))
        table[:, 0] = 1.0
        for k in range(1, max_degree + 1):
            table[:, k] = table[:, k - 1] * y[:, d]
        powers.append(table)
    values = np.ones((npoints, exponents.shape[0]))
    for d in range(nvars):
        values *= powers[d][:, exponents[:, d]]
    return MonomialMatrix(values=values, exponents=exponents)


def _weighted_norm(weights: np.ndarray, v: np.ndarray) -> float:
    return float(np.sqrt(weights @ (v * v)))


def standardize_columns(samples: np.ndarray,
                        weights: np.ndarray) -> np.ndarray:
    """Affine per-column normalization to weighted mean 0 and std 1.

    Monomials of the standardized variables span the same polynomial
    space as monomials of the raw ones, so the orthonormal basis and
    every rank count are mathematically unchanged.  Raw intermediate
    samples, however, often occupy a narrow band around a large mean;
    powers of such columns are nearly parallel, and orthonormalizing
    them amplifies roundoff into spurious factorization directions.
    Standardizing first keeps the noise floor at machine level.
    Near-constant columns are centered and left unscaled.
    """
    y = np.asarray(samples, dtype=float)
    if y.ndim == 1:
        y = y[:, None]
    w = np.asarray(weights, dtype=float)
    mean = w @ y
    centered = y - mean
    std = np.sqrt(w @ (centered * centered))
    scale = np.where(std > 1e-13 * (1.0 + np.abs(mean)), std, 1.0)
    return centered / scale


def weighted_mgs(columns: np.ndarray, weights: np.ndarray) -> ReducedBasis:
    """Weighted modified Gram-Schmidt with one re-orthogonalization pass.

    Columns are first scaled to unit weighted norm (the scaling is folded
    back into the triangular factor), then orthogonalized one at a time;
    a second full sweep against the accumulated basis is always applied.

    Parameters
    ----------
    columns : np.ndarray or MonomialMatrix
        Candidate basis columns, shape ``(npoints, nterms)``.
    weights : np.ndarray
        Nonnegative quadrature weights, shape ``(npoints,)``.

    Raises
    ------
    RankDeficiencyError
        If any diagonal of the scaled triangular factor falls below
        ``1e-14``, naming the offending column.
    """
    if isinstance(columns, MonomialMatrix):
        columns = columns.values
    y = np.array(columns, dtype=float)
    w = np.asarray(weights, dtype=float)
    if y.ndim != 2:
        raise ValueError("columns must form a matrix")
    if w.shape != (y.shape[0],):
        raise ValueError("weights length must match the number of rows")
    if np.any(w < 0):
        raise ValueError("weights must be nonnegative")
    npoints, nterms = y.shape

    scale = np.sqrt(w @ (y * y))
    for k in range(nterms):
        if scale[k] < _MIN_SCALED_DIAG:
            raise RankDeficiencyError(
                f"column {k} has numerically zero weighted norm", column=k)
    y /= scale[None, :]

    phi = np.empty_like(y)
    rtri = np.zeros((nterms, nterms))
    for k in range(nterms):
        v = y[:, k].copy()
        for _ in range(2):
            for i in range(k):
                c = float((w * phi[:, i]) @ v)
                v -= c * phi[:, i]
                rtri[i, k] += c
        diag = _weighted_norm(w, v)
        if diag < _MIN_SCALED_DIAG:
            raise RankDeficiencyError(
                f"column {k} is numerically dependent on the preceding "
                f"columns (scaled diagonal {diag:.3e})", column=k)
        rtri[k, k] = diag
        phi[:, k] = v / diag
    rtri *= scale[None, :]
    return ReducedBasis(phi=phi, rtri=rtri, weights=w)


def constraint_pairs(nterms: int) -> np.ndarray:
    """Index pairs ``(k1, k2)`` of basis products, graded over the pair.

    All ``nterms ** 2`` ordered pairs appear; symmetric duplicates are
    retained on purpose (the pivoted factorization assigns them zero
    diagonals harmlessly).
    """
    grid = total_degree_indices(2, 2 * (nterms - 1)) if nterms > 1 else \
        np.zeros((1, 2), dtype=np.int64)
    keep = np.all(grid < nterms, axis=1)
    return grid[keep]


def constraint_matrix(phi: np.ndarray) -> np.ndarray:
    """Pointwise products of basis-column pairs.

    Row ``j`` of the result holds ``phi[j, k1] * phi[j, k2]`` for every
    ordered pair ``(k1, k2)`` in :func:`constraint_pairs` order.  A weight
    vector ``u`` reproduces the discrete orthonormality of ``phi`` exactly
    when ``A^T u`` equals ``A^T w`` for the original weights ``w``.
    """
    pairs = constraint_pairs(phi.shape[1])
    return phi[:, pairs[:, 0]] * phi[:, pairs[:, 1]]


def _pivoted_weighted_qr(a: np.ndarray, weights: np.ndarray, *,
                         tol: float, max_rank: int | None):
    """Column-pivoted weighted Gram-Schmidt factorization of ``a``.

    Returns ``(q, diag)`` where the columns of ``q`` are weighted-
    orthonormal and ``diag`` holds the pivot norms in factorization order.
    In tolerance mode (``max_rank is None``) the sweep stops as soon as
    every remaining column has weighted residual norm at most ``tol``;
    residual norms never grow under orthogonal projection, so the number
    of columns produced is exactly the largest rank whose pivot exceeds
    ``tol``.  With ``max_rank`` set, exactly that many columns are
    produced regardless of their size (short of exact breakdown).
    """
    rem = np.array(a, dtype=float)
    w = np.asarray(weights, dtype=float)
    npoints, ncols = rem.shape
    limit = min(npoints, ncols)
    if max_rank is not None:
        limit = min(limit, max_rank)

    q_buf = np.empty((npoints, limit))
    diags: list[float] = []
    active = list(range(ncols))
    norms2 = w @ (rem * rem)

    k = 0
    while k < limit and active:
        act = np.asarray(active)
        local = int(np.argmax(norms2[act]))
        j = int(act[local])
        pivot_norm = np.sqrt(max(norms2[j], 0.0))
        if max_rank is None and pivot_norm <= tol:
            break
        if pivot_norm <= 1e-250:
            break
        v = rem[:, j].copy()
        if k:
            basis = q_buf[:, :k]
            v -= basis @ (basis.T @ (w * v))
        diag = _weighted_norm(w, v)
        if max_rank is None and diag <= tol:
            break
        if diag <= 1e-250:
            break
        qk = v / diag
        q_buf[:, k] = qk
        diags.append(diag)
        k += 1
        active.remove(j)
        if active:
            act = np.asarray(active)
            proj = (w * qk) @ rem[:, act]
            rem[:, act] -= np.outer(qk, proj)
            norms2[act] = w @ (rem[:, act] * rem[:, act])

    return q_buf[:, :k].copy(), np.asarray(diags)


def reduced_weights(phi: np.ndarray, weights: np.ndarray,
                    qr_tol: float = DEFAULT_QR_TOL, *,
                    fixed_rank: int | None = None,
                    enforce_orthogonality: bool = True,
                    _retried: bool = False) -> ModifiedQuadrature:
    """Sparse nonnegative weights preserving discrete orthonormality.

    The orthogonality constraints ``A^T u = A^T w`` are compressed by a
    rank-revealing weighted QR of the product matrix ``A`` and the
    surviving constraints are handed to a phase-I simplex, whose basic
    feasible solution has at most ``rank_used`` nonzero entries.

    Parameters
    ----------
    phi : np.ndarray or ReducedBasis
        Weighted-orthonormal basis columns.
    weights : np.ndarray
        Original quadrature weights.
    qr_tol : float
        Rank tolerance on the pivot norms of the product matrix.
    fixed_rank : int, optional
        Keep exactly this many leading pivoted columns instead of using
        the tolerance.  No retry and no orthogonality enforcement happen
        in this mode; degraded orthogonality is reported as-is.
    enforce_orthogonality : bool
        When true, an orthogonality error above ``1e-8`` triggers one
        automatic retry with ``qr_tol / 100``, after which
        :class:`ReductionFailureError` is raised.  When false the result
        is reported without judgement.

    Raises
    ------
    ReductionFailureError
        If the linear program is infeasible after the retry, or the
        orthogonality threshold cannot be met while enforcement is on.
    """
    if isinstance(phi, ReducedBasis):
        phi = phi.phi
    w = np.asarray(weights, dtype=float)
    a = constraint_matrix(phi)
    q, diags = _pivoted_weighted_qr(a, w, tol=qr_tol, max_rank=fixed_rank)
    rank = q.shape[1]
    if rank == 0:
        raise ReductionFailureError("constraint matrix has numerical rank 0")

    target = q.T @ w
    try:
        solution: LPSolution = phase_one_bfs(StandardFormLP(q.T, target))
    except InfeasibleProgramError as exc:
        if fixed_rank is None and not _retried:
            return reduced_weights(phi, w, qr_tol / 100.0,
                                   enforce_orthogonality=enforce_orthogonality,
                                   _retried=True)
        raise ReductionFailureError(
            f"sparse weight program infeasible at rank {rank}") from exc

    u = solution.u
    gram = phi.T @ (u[:, None] * phi)
    orth_error = float(np.max(np.abs(gram - np.eye(phi.shape[1]))))

    if (fixed_rank is None and enforce_orthogonality
            and orth_error > ORTHOGONALITY_THRESHOLD):
        if not _retried:
            return reduced_weights(phi, w, qr_tol / 100.0,
                                   enforce_orthogonality=True, _retried=True)
        raise ReductionFailureError(
            f"orthogonality error {orth_error:.3e} exceeds "
            f"{ORTHOGONALITY_THRESHOLD:.1e} after retry")

    return ModifiedQuadrature(
        u_star=u,
        rank_used=rank,
        nonzero_count=int(np.count_nonzero(u)),
        orthogonality_error=orth_error,
        qr_tol=qr_tol,
    )


def fixed_rank_for(reduced_degree: int, nvars: int = 2) -> int:
    """Leading-column count ``comb(2 * reduced_degree + nvars, nvars)``.

    This is the exact-arithmetic rank of the product-constraint matrix for
    a degree-``reduced_degree`` basis in ``nvars`` intermediate variables,
    used by the fixed-rank reduction mode.
    """
    return comb(2 * reduced_degree + nvars, nvars)


def reduced_project(samples_at_support: np.ndarray,
                    quad: ModifiedQuadrature, phi: np.ndarray,
                    psi: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Project through the reduced basis using only supported points.

    Computes ``Psi^T W Phi (Phi^T U* h)`` where ``h`` is supplied only at
    the support of ``u_star`` (ascending index order); grid points with
    zero weight are never read.

    Parameters
    ----------
    samples_at_support : np.ndarray
        Shape ``(len(quad.support), nout)`` or ``(len(quad.support),)``.
    quad : ModifiedQuadrature
    phi : np.ndarray or ReducedBasis
        The basis the weights were built for, over the full grid.
    psi : np.ndarray
        Target basis evaluation matrix over the full grid.
    weights : np.ndarray
        Original quadrature weights over the full grid.
    """
    if isinstance(phi, ReducedBasis):
        phi = phi.phi
    support = quad.support
    h = np.asarray(samples_at_support, dtype=float)
    squeeze = h.ndim == 1
    if squeeze:
        h = h[:, None]
    if h.shape[0] != support.shape[0]:
        raise ValueError(
            f"expected {support.shape[0]} sample rows (one per supported "
            f"point), got {h.shape[0]}")
    inner = phi[support].T @ (quad.u_star[support, None] * h)
    coeffs = psi.T @ (weights[:, None] * (phi @ inner))
    return coeffs[:, 0] if squeeze else coeffs
