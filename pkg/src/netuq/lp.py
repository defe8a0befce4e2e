"""Phase-I revised simplex for extracting basic feasible solutions.

Solves feasibility problems ``A u = b, u >= 0`` where ``A`` has full row
rank and many more columns than rows.  Only vertex (basic) solutions are
useful downstream: their support is at most the number of rows and the
supporting columns are linearly independent, which is what turns a dense
weight vector into a sparse one.  Interior-point methods return strictly
positive solutions and are therefore useless here.

The basis inverse is represented as a dense LU factorization plus a chain
of product-form eta updates; the factorization is rebuilt every
``refactor_period`` pivots.  Pricing uses Dantzig's rule and falls back to
Bland's rule once the degenerate-pivot budget is spent, which guarantees
termination.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lu_factor, lu_solve

REFACTOR_PERIOD = 30
ITERATION_FACTOR = 50        # pivot cap: ITERATION_FACTOR * ncols
DEGENERATE_FACTOR = 10       # switch to Bland after DEGENERATE_FACTOR * ncols
FEASIBILITY_TOL = 1e-10      # relative, scaled by (1 + |b|_inf)
_COST_TOL = 1e-9
_PIVOT_TOL = 1e-11
_TINY = 1e-300


class InfeasibleProgramError(RuntimeError):
    """Phase-I optimum stayed above the feasibility tolerance."""


class IterationLimitError(RuntimeError):
    """The pivot cap was exhausted before reaching an optimum."""


@dataclass(frozen=True)
class StandardFormLP:
    """Equality-constrained feasibility problem ``A u = b, u >= 0``.

    Attributes
    ----------
    constraints : np.ndarray
        Constraint matrix ``A`` of shape ``(nrows, ncols)`` with
        ``nrows <= ncols``; rows are expected to be linearly independent.
    rhs : np.ndarray
        Right-hand side ``b`` of shape ``(nrows,)``.
    """

    constraints: np.ndarray = field(repr=False)
    rhs: np.ndarray = field(repr=False)

    def __post_init__(self):
        a = np.asarray(self.constraints, dtype=float)
        b = np.asarray(self.rhs, dtype=float)
        if a.ndim != 2:
            raise ValueError("constraint matrix must be two-dimensional")
        if b.shape != (a.shape[0],):
            raise ValueError(
                f"rhs must have shape ({a.shape[0]},), got {b.shape}")
        if a.shape[0] > a.shape[1]:
            raise ValueError(
                "expected at least as many columns as rows "
                f"(got shape {a.shape})")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise ValueError("constraints and rhs must be finite")
        object.__setattr__(self, "constraints", a)
        object.__setattr__(self, "rhs", b)


@dataclass
class LPSolution:
    """Basic feasible solution returned by :func:`phase_one_bfs`."""

    u: np.ndarray = field(repr=False)
    basis: np.ndarray = field(repr=False)
    iterations: int
    residual: float

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.u)

    @property
    def nonzero_count(self) -> int:
        return int(np.count_nonzero(self.u))


class _FactorizedBasis:
    """Dense LU of the simplex basis plus product-form eta updates."""

    def __init__(self, columns: np.ndarray, basic: list[int],
                 refactor_period: int):
        self._columns = columns
        self.basic = list(basic)
        self._period = refactor_period
        self.refactor()

    def refactor(self):
        self._lu = lu_factor(self._columns[:, self.basic])
        self._etas: list[tuple[int, np.ndarray]] = []

    def ftran(self, rhs: np.ndarray) -> np.ndarray:
        """Solve ``B x = rhs``."""
        x = lu_solve(self._lu, rhs)
        for pos, d in self._etas:
            t = x[pos] / d[pos]
            x -= d * t
            x[pos] = t
        return x

    def btran(self, cost: np.ndarray) -> np.ndarray:
        """Solve ``B^T y = cost``."""
        c = cost.copy()
        for pos, d in reversed(self._etas):
            c[pos] = (c[pos] - d @ c + d[pos] * c[pos]) / d[pos]
        return lu_solve(self._lu, c, trans=1)

    def replace(self, pos: int, entering: int, direction: np.ndarray):
        """Swap the basic variable at ``pos`` for ``entering``.

        ``direction`` must be ``ftran`` of the entering column, computed
        against the basis before the swap.
        """
        self.basic[pos] = entering
        self._etas.append((pos, direction.copy()))
        if len(self._etas) >= self._period:
            self.refactor()


def phase_one_bfs(lp: StandardFormLP, *,
                  refactor_period: int = REFACTOR_PERIOD,
                  feasibility_tol: float = FEASIBILITY_TOL) -> LPSolution:
    """Find a basic feasible solution of ``A u = b, u >= 0``.

    Rows whose right-hand side is negative are negated first (this does not
    change the solution set), one artificial variable per row is added, and
    the sum of artificials is minimized by the revised simplex method.  The
    returned solution gets one step of iterative refinement through the
    final basis.

    Returns
    -------
    LPSolution
        ``u >= 0`` elementwise with at most ``nrows`` nonzero entries and
        ``|A u - b|_inf <= feasibility_tol * (1 + |b|_inf)``.

    Raises
    ------
    InfeasibleProgramError
        If the phase-I optimum exceeds the feasibility tolerance.
    IterationLimitError
        If the pivot cap ``ITERATION_FACTOR * ncols`` is reached.
    """
    a_orig = lp.constraints
    b_orig = lp.rhs
    nrows, ncols = a_orig.shape

    flip = np.where(b_orig < 0.0, -1.0, 1.0)
    columns = np.hstack([a_orig * flip[:, None], np.eye(nrows)])
    b = b_orig * flip
    cost = np.concatenate([np.zeros(ncols), np.ones(nrows)])

    basis = _FactorizedBasis(columns, list(range(ncols, ncols + nrows)),
                             refactor_period)
    max_pivots = ITERATION_FACTOR * ncols
    degenerate_budget = DEGENERATE_FACTOR * ncols
    degenerate_count = 0
    use_bland = False
    b_scale = 1.0 + np.max(np.abs(b)) if nrows else 1.0

    pivots = 0
    while True:
        xb = basis.ftran(b)
        y = basis.btran(cost[basis.basic])
        reduced = cost - columns.T @ y
        col_scale = 1.0 + np.abs(columns).T @ np.abs(y)
        candidates = np.flatnonzero(reduced < -_COST_TOL * col_scale)
        if candidates.size == 0:
            break
        if use_bland:
            entering = int(candidates[0])
        else:
            entering = int(candidates[np.argmin(reduced[candidates]
                                                / col_scale[candidates])])

        if pivots >= max_pivots:
            raise IterationLimitError(
                f"phase-I simplex exceeded {max_pivots} pivots")
        direction = basis.ftran(columns[:, entering])
        d_scale = max(1.0, np.max(np.abs(direction)))
        rows = np.flatnonzero(direction > _PIVOT_TOL * d_scale)
        if rows.size == 0:
            # A negative reduced cost with no blocking row cannot occur in
            # phase I (the objective is bounded below by zero); reaching
            # this means the pivot tolerance swallowed the direction.
            raise InfeasibleProgramError(
                "phase-I direction unbounded; constraints are numerically "
                "inconsistent")
        ratios = np.maximum(xb[rows], 0.0) / direction[rows]
        theta = np.min(ratios)
        tie = rows[ratios <= theta + 1e-12 * (1.0 + theta)]
        if use_bland:
            leaving_pos = int(tie[np.argmin([basis.basic[t] for t in tie])])
        else:
            leaving_pos = int(tie[np.argmax(direction[tie])])

        if theta <= 1e-12 * b_scale:
            degenerate_count += 1
            if degenerate_count > degenerate_budget:
                use_bland = True
        basis.replace(leaving_pos, entering, direction)
        pivots += 1

    xb = basis.ftran(b)
    objective = float(np.sum(xb[np.asarray(basis.basic) >= ncols]))
    if objective > feasibility_tol * b_scale:
        raise InfeasibleProgramError(
            f"phase-I optimum {objective:.3e} exceeds tolerance "
            f"{feasibility_tol * b_scale:.3e}; no nonnegative solution")

    _evict_artificials(basis, columns, ncols)

    # Iterative refinement against the exact basis columns, then clamp the
    # roundoff-negative entries that refinement can introduce.
    basic = np.asarray(basis.basic)
    bmat = columns[:, basic]
    lu = lu_factor(bmat)
    xb = lu_solve(lu, b)
    for _ in range(2):
        residual = b - bmat @ xb
        xb += lu_solve(lu, residual)
    xb[np.abs(xb) <= 1e-14 * b_scale] = 0.0
    xb = np.maximum(xb, 0.0)

    u = np.zeros(ncols)
    keep = basic < ncols
    u[basic[keep]] = xb[keep]
    residual = float(np.max(np.abs(a_orig @ u - b_orig))) if nrows else 0.0
    if residual > feasibility_tol * b_scale:
        raise InfeasibleProgramError(
            f"refined solution residual {residual:.3e} exceeds tolerance")
    return LPSolution(u=u, basis=basic, iterations=pivots, residual=residual)


def _evict_artificials(basis: _FactorizedBasis, columns: np.ndarray,
                       ncols: int):
    """Pivot zero-level artificial variables out of the final basis.

    Any artificial stuck in the basis at the phase-I optimum sits at level
    zero; exchanging it for an original column with a nonzero pivot element
    in its row keeps the solution unchanged.  A row with no such column is
    redundant and the artificial simply stays at zero.
    """
    for pos in range(len(basis.basic)):
        if basis.basic[pos] < ncols:
            continue
        unit = np.zeros(len(basis.basic))
        unit[pos] = 1.0
        row = basis.btran(unit) @ columns[:, :ncols]
        in_basis = np.zeros(ncols, dtype=bool)
        for var in basis.basic:
            if var < ncols:
                in_basis[var] = True
        row[in_basis] = 0.0
        j = int(np.argmax(np.abs(row)))
        if np.abs(row[j]) <= 1e-9:
            continue
        direction = basis.ftran(columns[:, j])
        basis.replace(pos, j, direction)
