"""Stochastic Galerkin solvers for network coupling coefficients.

The coupling variables are expanded in an orthonormal chaos basis and the
projected interface residuals are driven to zero by Newton iteration.
Diagonal Jacobian blocks are exact identities; off-diagonal blocks are
assembled from the chaos coefficients of the output sensitivities
contracted with the basis triple products.

The reduced variant replaces the full-grid sampling of a component by the
reduced-basis/modified-quadrature pipeline: per Newton iteration it
orthonormalizes monomials of the current intermediate-variable samples,
builds a sparse weight vector, and solves the component only at the few
grid points that carry weight.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .chaos import TensorBasis, evaluate_basis, legendre_orthonormal
from .network import ComponentModel, NonconvergenceError
from .parallel import run_indexed
from .pseudospectral import project
from .quadrature import QuadratureGrid, gauss_legendre
from .reduction import (DEFAULT_QR_TOL, RankDeficiencyError,
                        ReductionFailureError, monomial_matrix,
                        reduced_project, reduced_weights,
                        standardize_columns, weighted_mgs)

TRIPLE_DROP_TOL = 1e-13


@dataclass
class GalerkinState:
    """Chaos coefficients of the two coupling variables.

    ``vhat1`` has shape ``(nbasis, m1)`` and ``vhat2`` shape
    ``(nbasis, m2)``; row zero carries the mean.
    """

    vhat1: np.ndarray
    vhat2: np.ndarray

    def __post_init__(self):
        self.vhat1 = np.atleast_2d(np.asarray(self.vhat1, dtype=float)).copy()
        self.vhat2 = np.atleast_2d(np.asarray(self.vhat2, dtype=float)).copy()

    @classmethod
    def constant(cls, nbasis: int, v1, v2) -> "GalerkinState":
        """State whose expansions are the given constant coupling values."""
        v1 = np.atleast_1d(np.asarray(v1, dtype=float))
        v2 = np.atleast_1d(np.asarray(v2, dtype=float))
        vhat1 = np.zeros((nbasis, v1.shape[0]))
        vhat2 = np.zeros((nbasis, v2.shape[0]))
        vhat1[0] = v1
        vhat2[0] = v2
        return cls(vhat1, vhat2)

    def copy(self) -> "GalerkinState":
        return GalerkinState(self.vhat1.copy(), self.vhat2.copy())


@dataclass(frozen=True)
class TripleProductTensor:
    """Sparse table of triple products of orthonormal basis functions.

    ``table[(i, j, k)]`` holds the integral of ``psi_i psi_j psi_k``
    against the uniform probability measure; entries below the drop
    tolerance are absent.
    """

    basis: TensorBasis
    table: dict[tuple[int, int, int], float] = field(repr=False)
    drop_tol: float = TRIPLE_DROP_TOL

    def as_dense(self) -> np.ndarray:
        size = self.basis.size
        dense = np.zeros((size, size, size))
        for (i, j, k), value in self.table.items():
            dense[i, j, k] = value
        return dense


def triple_products(basis: TensorBasis,
                    drop_tol: float = TRIPLE_DROP_TOL) -> TripleProductTensor:
    """Triple products of every basis-function triplet.

    The integrand has total degree at most ``3 * max_degree``, so a Gauss
    rule with ``ceil((3 N + 1) / 2)`` points per dimension is exact; the
    tensor-product integral factorizes into univariate triple products,
    which are computed on that rule once per dimension.
    """
    n = basis.max_degree
    npts = max(1, math.ceil((3 * n + 1) / 2))
    x, w = gauss_legendre(npts)
    psi1 = legendre_orthonormal(x, n)
    uni = np.einsum("qa,qb,qc,q->abc", psi1, psi1, psi1, w)

    idx = basis.indices
    size = basis.size
    dense = np.ones((size, size, size))
    for d in range(basis.dim):
        col = idx[:, d]
        dense *= uni[col[:, None, None], col[None, :, None], col[None, None, :]]

    table: dict[tuple[int, int, int], float] = {}
    nonzero = np.argwhere(np.abs(dense) > drop_tol)
    for i, j, k in nonzero:
        table[(int(i), int(j), int(k))] = float(dense[i, j, k])
    return TripleProductTensor(basis=basis, table=table, drop_tol=drop_tol)


@dataclass
class ReductionRecord:
    """Reduction outcome for one component in one Newton iteration."""

    component: int
    nterms: int
    rank_used: int
    nonzero_count: int
    orthogonality_error: float
    fallback: bool = False


@dataclass
class GalerkinTrace:
    """Residual history and work counters of a Galerkin Newton run."""

    residuals: list[float] = field(default_factory=list)
    solves_c1: int = 0
    solves_c2: int = 0
    iter_solves_c1: list[int] = field(default_factory=list)
    iter_solves_c2: list[int] = field(default_factory=list)
    time_c1: float = 0.0
    time_c2: float = 0.0
    reductions: list[list[ReductionRecord]] = field(default_factory=list)
    verify_solves_c1: int = 0
    verify_solves_c2: int = 0
    verify_residuals: list[float] = field(default_factory=list)
    converged: bool = False

    @property
    def iterations(self) -> int:
        return len(self.residuals)


def _local_points(grid: QuadratureGrid, c1: ComponentModel,
                  c2: ComponentModel) -> tuple[np.ndarray, np.ndarray]:
    total = c1.n_random + c2.n_random
    if grid.dim != total:
        raise ValueError(
            f"grid dimension {grid.dim} does not match the components' "
            f"{total} random coordinates")
    return grid.points[:, :c1.n_random], grid.points[:, c1.n_random:]


def _sample_component(comp: ComponentModel, v_in: np.ndarray,
                      x_local: np.ndarray, indices: np.ndarray,
                      need_jac: bool):
    """Solve a component at selected grid rows; returns outputs and
    optionally output sensitivities, plus the wall time spent."""
    count = indices.shape[0]
    g = np.empty((count, comp.m_out))
    dg = np.empty((count, comp.m_out, comp.m_in)) if need_jac else None

    def task(i: int):
        q = indices[i]
        u = comp.solve(v_in[q], x_local[q])
        g[i] = comp.output(u)
        if need_jac:
            _, dg[i] = comp.sensitivity(u, v_in[q], x_local[q])

    start = time.perf_counter()
    run_indexed(task, count)
    elapsed = time.perf_counter() - start
    return g, dg, elapsed


def _check_shapes(state: GalerkinState, c1: ComponentModel,
                  c2: ComponentModel, nbasis: int):
    if c1.m_in != c2.m_out or c2.m_in != c1.m_out:
        raise ValueError(
            "component coupling widths are inconsistent: "
            f"c1 receives {c1.m_in} and c2 produces {c2.m_out}; "
            f"c2 receives {c2.m_in} and c1 produces {c1.m_out}")
    if state.vhat1.shape != (nbasis, c1.m_out):
        raise ValueError(
            f"vhat1 must have shape ({nbasis}, {c1.m_out}), "
            f"got {state.vhat1.shape}")
    if state.vhat2.shape != (nbasis, c2.m_out):
        raise ValueError(
            f"vhat2 must have shape ({nbasis}, {c2.m_out}), "
            f"got {state.vhat2.shape}")


def galerkin_residual(state: GalerkinState, c1: ComponentModel,
                      c2: ComponentModel, grid: QuadratureGrid,
                      basis: TensorBasis, psi: np.ndarray | None = None
                      ) -> tuple[np.ndarray, np.ndarray]:
    """Projected interface residuals at the given coefficient state.

    Both components are solved at every grid point with coupling inputs
    taken from the evaluated expansions; the residual coefficients are
    the state coefficients minus the projected outputs.
    """
    if psi is None:
        psi = evaluate_basis(basis, grid.points)
    _check_shapes(state, c1, c2, basis.size)
    x1, x2 = _local_points(grid, c1, c2)
    v1 = psi @ state.vhat1
    v2 = psi @ state.vhat2
    everything = np.arange(grid.npoints)
    g1, _, _ = _sample_component(c1, v2, x1, everything, need_jac=False)
    g2, _, _ = _sample_component(c2, v1, x2, everything, need_jac=False)
    hhat1 = state.vhat1 - project(g1, psi, grid.weights)
    hhat2 = state.vhat2 - project(g2, psi, grid.weights)
    return hhat1, hhat2


def _offdiag_block(tdense: np.ndarray, dghat: np.ndarray) -> np.ndarray:
    """Jacobian block ``-sum_k dghat[k] <psi_i psi_j psi_k>`` flattened to
    ``(nbasis * m_out, nbasis * m_in)``."""
    nbasis = tdense.shape[0]
    m_out, m_in = dghat.shape[1], dghat.shape[2]
    block = -np.einsum("ijk,kab->iajb", tdense, dghat)
    return block.reshape(nbasis * m_out, nbasis * m_in)


def galerkin_newton(state0: GalerkinState, c1: ComponentModel,
                    c2: ComponentModel, grid: QuadratureGrid,
                    basis: TensorBasis, *, tol: float = 1e-10,
                    max_iter: int = 30,
                    psi: np.ndarray | None = None,
                    triples: TripleProductTensor | None = None
                    ) -> tuple[GalerkinState, GalerkinTrace]:
    """Newton iteration on the projected interface system, full quadrature.

    Convergence is declared when the max-norm over all residual
    coefficients drops to ``tol``.  Every iteration solves each component
    once per grid point.
    """
    if psi is None:
        psi = evaluate_basis(basis, grid.points)
    if triples is None:
        triples = triple_products(basis)
    _check_shapes(state0, c1, c2, basis.size)
    x1, x2 = _local_points(grid, c1, c2)
    tdense = triples.as_dense()
    w = grid.weights
    nbasis = basis.size
    m1, m2 = c1.m_out, c2.m_out
    everything = np.arange(grid.npoints)

    state = state0.copy()
    trace = GalerkinTrace()
    for _ in range(max_iter):
        v1 = psi @ state.vhat1
        v2 = psi @ state.vhat2
        g1, dg1, dt1 = _sample_component(c1, v2, x1, everything, True)
        g2, dg2, dt2 = _sample_component(c2, v1, x2, everything, True)
        trace.solves_c1 += grid.npoints
        trace.solves_c2 += grid.npoints
        trace.iter_solves_c1.append(grid.npoints)
        trace.iter_solves_c2.append(grid.npoints)
        trace.time_c1 += dt1
        trace.time_c2 += dt2

        hhat1 = state.vhat1 - project(g1, psi, w)
        hhat2 = state.vhat2 - project(g2, psi, w)
        res = max(np.max(np.abs(hhat1)), np.max(np.abs(hhat2)))
        trace.residuals.append(float(res))
        if not np.isfinite(res):
            raise NonconvergenceError(
                "projected residual became non-finite", trace)
        if res <= tol:
            trace.converged = True
            return state, trace

        dghat1 = project(dg1.reshape(grid.npoints, m1 * m2), psi, w)
        dghat2 = project(dg2.reshape(grid.npoints, m2 * m1), psi, w)
        j12 = _offdiag_block(tdense, dghat1.reshape(nbasis, m1, m2))
        j21 = _offdiag_block(tdense, dghat2.reshape(nbasis, m2, m1))
        jac = np.block([
            [np.eye(nbasis * m1), j12],
            [j21, np.eye(nbasis * m2)],
        ])
        rhs = -np.concatenate([hhat1.ravel(), hhat2.ravel()])
        delta = np.linalg.solve(jac, rhs)
        state.vhat1 += delta[:nbasis * m1].reshape(nbasis, m1)
        state.vhat2 += delta[nbasis * m1:].reshape(nbasis, m2)
    raise NonconvergenceError(
        f"Galerkin Newton did not reach tol={tol:.1e} in {max_iter} "
        f"iterations (last residual {trace.residuals[-1]:.3e})", trace)


def _pruned_basis(y: np.ndarray, weights: np.ndarray, degree: int):
    """Weighted-orthonormal monomial basis with dependent columns dropped.

    Coupling series routinely pass through degenerate configurations
    while Newton iterates (constant at the initial state, exactly affine
    in each other right after an update from a constant state).  Dropping
    the columns the factorization names keeps a well-conditioned basis
    spanning the polynomial content the samples actually carry; a
    constant state legitimately reduces all the way to a single basis
    function and hence a single quadrature point.
    """
    columns = monomial_matrix(y, degree).values
    keep = list(range(columns.shape[1]))
    while True:
        try:
            return weighted_mgs(columns[:, keep], weights)
        except RankDeficiencyError as exc:
            if exc.column is None or len(keep) <= 1:
                raise
            del keep[exc.column]


def _intermediate_samples(which: int, mode: str, x1: np.ndarray,
                          x2: np.ndarray, v1: np.ndarray,
                          v2: np.ndarray) -> np.ndarray:
    """Intermediate-variable samples for the component being reduced.

    ``local`` pairs the component's own random coordinates with the
    coupling series it receives; ``couplings`` uses both coupling series
    (valid only for components without local random coordinates, since
    their sampled outputs must be functions of the intermediates alone).
    """
    if mode == "local":
        return np.hstack([x1, v2]) if which == 1 else np.hstack([x2, v1])
    if mode == "couplings":
        return np.hstack([v1, v2])
    raise ValueError(f"unknown intermediates mode {mode!r}")


def galerkin_newton_reduced(state0: GalerkinState, c1: ComponentModel,
                            c2: ComponentModel, grid: QuadratureGrid,
                            basis: TensorBasis, *, reduced_degree: int,
                            reduce_which: str = "component2",
                            intermediates: str = "local",
                            qr_tol: float = DEFAULT_QR_TOL,
                            tol: float = 1e-10, max_iter: int = 30,
                            max_verify: int = 3,
                            psi: np.ndarray | None = None,
                            triples: TripleProductTensor | None = None
                            ) -> tuple[GalerkinState, GalerkinTrace]:
    """Galerkin Newton with reduced sampling of selected components.

    Per iteration and per reduced component: monomials of the current
    intermediate-variable samples (standardized, with numerically
    dependent columns pruned) are weighted-orthonormalized, a sparse
    weight vector is built, and the component is solved only at supported
    grid points; outputs and sensitivities are projected through the
    reduced basis.  The reduction is rebuilt from scratch every iteration
    because the intermediates move with the state.

    Convergence is declared on the full-quadrature residual of the final
    iterate: once the reduced residual passes the tolerance, one full
    sampling pass verifies it (its solves are tallied separately as
    ``verify_solves_*``).  If verification fails the inner tolerance is
    tightened and iteration continues, up to ``max_verify`` attempts.

    A reduction failure (rank breakdown or an unmeetable orthogonality
    threshold) falls back to full sampling of that component for the
    iteration, with a warning.
    """
    if reduce_which not in ("component1", "component2", "both"):
        raise ValueError(f"unknown reduce_which value {reduce_which!r}")
    reduce1 = reduce_which in ("component1", "both")
    reduce2 = reduce_which in ("component2", "both")
    if intermediates == "couplings":
        if reduce1 and c1.n_random > 0:
            raise ValueError(
                "intermediates='couplings' requires the reduced component "
                "to have no local random coordinates (component 1 has "
                f"{c1.n_random})")
        if reduce2 and c2.n_random > 0:
            raise ValueError(
                "intermediates='couplings' requires the reduced component "
                "to have no local random coordinates (component 2 has "
                f"{c2.n_random})")

    if psi is None:
        psi = evaluate_basis(basis, grid.points)
    if triples is None:
        triples = triple_products(basis)
    _check_shapes(state0, c1, c2, basis.size)
    x1, x2 = _local_points(grid, c1, c2)
    tdense = triples.as_dense()
    w = grid.weights
    nbasis = basis.size
    m1, m2 = c1.m_out, c2.m_out
    everything = np.arange(grid.npoints)

    def _reduced_pass(which: int, v1s, v2s, records):
        comp = c1 if which == 1 else c2
        v_in = v2s if which == 1 else v1s
        x_local = x1 if which == 1 else x2
        y = _intermediate_samples(which, intermediates, x1, x2, v1s, v2s)
        try:
            rb = _pruned_basis(standardize_columns(y, w), w,
                               reduced_degree)
            mq = reduced_weights(rb.phi, w, qr_tol)
        except (RankDeficiencyError, ReductionFailureError) as exc:
            warnings.warn(
                f"reduction failed for component {which} "
                f"({exc}); falling back to full quadrature", stacklevel=2)
            g, dg, dt = _sample_component(comp, v_in, x_local, everything,
                                          True)
            records.append(ReductionRecord(
                component=which, nterms=0, rank_used=0,
                nonzero_count=grid.npoints,
                orthogonality_error=float("nan"), fallback=True))
            ghat = project(g, psi, w)
            dghat = project(dg.reshape(grid.npoints, -1), psi, w)
            return ghat, dghat, grid.npoints, dt
        support = mq.support
        g, dg, dt = _sample_component(comp, v_in, x_local, support, True)
        records.append(ReductionRecord(
            component=which, nterms=rb.nterms, rank_used=mq.rank_used,
            nonzero_count=mq.nonzero_count,
            orthogonality_error=mq.orthogonality_error))
        ghat = reduced_project(g, mq, rb.phi, psi, w)
        dghat = reduced_project(dg.reshape(support.shape[0], -1),
                                mq, rb.phi, psi, w)
        return ghat, dghat, support.shape[0], dt

    state = state0.copy()
    trace = GalerkinTrace()
    inner_tol = tol
    verifications = 0
    for _ in range(max_iter):
        v1s = psi @ state.vhat1
        v2s = psi @ state.vhat2
        records: list[ReductionRecord] = []

        if reduce1:
            ghat1, dghat1, n1, dt1 = _reduced_pass(1, v1s, v2s, records)
        else:
            g1, dg1, dt1 = _sample_component(c1, v2s, x1, everything, True)
            ghat1 = project(g1, psi, w)
            dghat1 = project(dg1.reshape(grid.npoints, -1), psi, w)
            n1 = grid.npoints
        if reduce2:
            ghat2, dghat2, n2, dt2 = _reduced_pass(2, v1s, v2s, records)
        else:
            g2, dg2, dt2 = _sample_component(c2, v1s, x2, everything, True)
            ghat2 = project(g2, psi, w)
            dghat2 = project(dg2.reshape(grid.npoints, -1), psi, w)
            n2 = grid.npoints

        trace.solves_c1 += n1
        trace.solves_c2 += n2
        trace.iter_solves_c1.append(n1)
        trace.iter_solves_c2.append(n2)
        trace.time_c1 += dt1
        trace.time_c2 += dt2
        trace.reductions.append(records)

        hhat1 = state.vhat1 - ghat1
        hhat2 = state.vhat2 - ghat2
        res = max(np.max(np.abs(hhat1)), np.max(np.abs(hhat2)))
        trace.residuals.append(float(res))
        if not np.isfinite(res):
            raise NonconvergenceError(
                "projected residual became non-finite", trace)

        if res <= inner_tol:
            vhat1_full, vhat2_full = galerkin_residual(
                state, c1, c2, grid, basis, psi)
            trace.verify_solves_c1 += grid.npoints
            trace.verify_solves_c2 += grid.npoints
            vres = max(np.max(np.abs(vhat1_full)),
                       np.max(np.abs(vhat2_full)))
            trace.verify_residuals.append(float(vres))
            if vres <= tol:
                trace.converged = True
                return state, trace
            verifications += 1
            if verifications >= max_verify:
                raise NonconvergenceError(
                    f"full-quadrature residual {vres:.3e} still above "
                    f"tol={tol:.1e} after {verifications} verification "
                    f"attempts", trace)
            inner_tol = max(inner_tol * 0.01, 1e-15)

        j12 = _offdiag_block(tdense, dghat1.reshape(nbasis, m1, m2))
        j21 = _offdiag_block(tdense, dghat2.reshape(nbasis, m2, m1))
        jac = np.block([
            [np.eye(nbasis * m1), j12],
            [j21, np.eye(nbasis * m2)],
        ])
        rhs = -np.concatenate([hhat1.ravel(), hhat2.ravel()])
        delta = np.linalg.solve(jac, rhs)
        state.vhat1 += delta[:nbasis * m1].reshape(nbasis, m1)
        state.vhat2 += delta[nbasis * m1:].reshape(nbasis, m2)
    raise NonconvergenceError(
        f"reduced Galerkin Newton did not reach tol={tol:.1e} in "
        f"{max_iter} iterations (last residual {trace.residuals[-1]:.3e})",
        trace)
