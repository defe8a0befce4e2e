"""Built-in benchmark problems.

Two problems exercise the library end to end:

* a composite function in ``s`` uniform inputs whose two intermediates
  feed an exponential response, used to study reduced-basis sparsity and
  accuracy of the modified quadrature;
* a two-component heat network (a linear conduction pipe coupled to a
  nonlinear reaction column) for the network solvers and the stochastic
  Galerkin variants.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numpy as np
from scipy.linalg import solve_banded

from .chaos import TensorBasis, evaluate_basis
from .galerkin import (GalerkinState, GalerkinTrace, galerkin_newton,
                       galerkin_newton_reduced, triple_products)
from .network import (ComponentModel, CouplingState, SolveTrace,
                      eliminate_solve)
from .parallel import run_indexed
from .pseudospectral import project
from .quadrature import tensor_gauss
from .reduction import (DEFAULT_QR_TOL, fixed_rank_for, monomial_matrix,
                        reduced_project, reduced_weights, weighted_mgs)

COMPOSITE_REFERENCE_DEGREE = 8


# ---------------------------------------------------------------------------
# composite function benchmark


class CompositeFunctionProblem:
    """Composite map with two intermediates and an exponential response.

    The intermediates are ``y1 = x1`` and ``y2 = 1 / (10 + sum_i x_i / i)``
    with all ``x_i`` uniform on [-1, 1]; the response is
    ``h = exp(y1 + y2)``.  ``y2`` stays inside a narrow positive band, so
    the response is smooth and positive.
    """

    n_intermediates = 2

    def __init__(self, s: int):
        if s < 1:
            raise ValueError("dimension s must be at least 1")
        self.s = s
        self._mode_weights = 1.0 / np.arange(1, s + 1)

    def intermediates(self, x: np.ndarray) -> np.ndarray:
        """Intermediate samples, shape ``(npoints, 2)``."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[1] != self.s:
            raise ValueError(f"expected {self.s} input columns, "
                             f"got {x.shape[1]}")
        y1 = x[:, 0]
        y2 = 1.0 / (10.0 + x @ self._mode_weights)
        return np.column_stack([y1, y2])

    def response(self, y: np.ndarray) -> np.ndarray:
        y = np.atleast_2d(np.asarray(y, dtype=float))
        return np.exp(y[:, 0] + y[:, 1])

    @property
    def y2_bounds(self) -> tuple[float, float]:
        reach = float(np.sum(self._mode_weights))
        return 1.0 / (10.0 + reach), 1.0 / (10.0 - reach)


@lru_cache(maxsize=4)
def _composite_reference(s: int, degree: int) -> tuple[np.ndarray, ...]:
    """Pseudospectral reference coefficients of the composite response.

    The response is sampled directly (no intermediate truncation) on the
    degree-matched tensor grid, so the reference carries the quadrature's
    full polynomial exactness.  Coefficients align with any lower-degree
    basis as a prefix because the index ordering is graded.
    """
    problem = CompositeFunctionProblem(s)
    grid = tensor_gauss(s, degree + 1)
    basis = TensorBasis.total_degree(s, degree)
    psi = evaluate_basis(basis, grid.points)
    h = problem.response(problem.intermediates(grid.points))
    return (project(h, psi, grid.weights),)


def composite_reference(s: int,
                        degree: int = COMPOSITE_REFERENCE_DEGREE
                        ) -> np.ndarray:
    """Reference response coefficients; cached per (s, degree)."""
    return _composite_reference(s, degree)[0].copy()


@dataclass(frozen=True)
class CompositeRow:
    """One row of the composite sparsity/accuracy table."""

    degree: int
    basis_size: int
    npoints: int
    nreduced: int
    nonzeros: int
    err_full: float
    err_reduced: float
    orth_error: float


def composite_experiment(s: int, degree: int, reduced_degree: int | None = None,
                         qr_tol: float = DEFAULT_QR_TOL,
                         rank_mode: str = "tolerance", *,
                         reference_degree: int = COMPOSITE_REFERENCE_DEGREE
                         ) -> CompositeRow:
    """Run the composite benchmark at one expansion degree.

    The pipeline projects the intermediates to degree ``degree``,
    re-evaluates the truncated series on the grid, and pushes the response
    through both the full pseudospectral projection and the
    reduced-basis/modified-quadrature route.  Errors are max-norm
    coefficient deviations from the cached high-degree reference,
    compared over the shared leading coefficients.

    ``rank_mode`` is ``tolerance`` (numerical rank at ``qr_tol``) or
    ``fixed-rank`` (exactly ``C(2 N' + 2, 2)`` basis products).
    """
    if rank_mode not in ("tolerance", "fixed-rank"):
        raise ValueError(f"unknown rank_mode {rank_mode!r}")
    if reduced_degree is None:
        reduced_degree = degree
    if degree < 1 or degree > reference_degree:
        raise ValueError(
            f"degree must lie in [1, {reference_degree}], got {degree}")

    problem = CompositeFunctionProblem(s)
    grid = tensor_gauss(s, degree + 1)
    basis = TensorBasis.total_degree(s, degree)
    psi = evaluate_basis(basis, grid.points)
    w = grid.weights

    y = problem.intermediates(grid.points)
    yhat = project(y, psi, w)
    ytilde = psi @ yhat

    h = problem.response(ytilde)
    hhat_full = project(h, psi, w)

    # Monomials of the raw series samples, deliberately unstandardized.
    # The intermediate samples occupy narrow bands, so their raw powers
    # are nearly parallel and orthonormalizing them leaves a roundoff
    # floor near the default rank tolerance; the sparsity counts at
    # tight tolerance and the orthogonality degradation at loose
    # tolerance both live in that floor.  Standardizing first (as the
    # coupled solver must) drops the floor to machine level and reports
    # the clean numerical ranks instead, roughly the loose-tolerance
    # counts at every tolerance.
    rb = weighted_mgs(monomial_matrix(ytilde, reduced_degree), w)
    fixed_rank = None
    if rank_mode == "fixed-rank":
        fixed_rank = fixed_rank_for(reduced_degree,
                                    problem.n_intermediates)
    mq = reduced_weights(rb.phi, w, qr_tol, fixed_rank=fixed_rank,
                         enforce_orthogonality=False)

    h_support = problem.response(ytilde[mq.support])
    hhat_reduced = reduced_project(h_support, mq, rb.phi, psi, w)

    ref = composite_reference(s, reference_degree)
    lead = ref[:basis.size]
    err_full = float(np.max(np.abs(hhat_full - lead)))
    err_reduced = float(np.max(np.abs(hhat_reduced - lead)))

    return CompositeRow(
        degree=degree, basis_size=basis.size, npoints=grid.npoints,
        nreduced=rb.nterms, nonzeros=mq.nonzero_count,
        err_full=err_full, err_reduced=err_reduced,
        orth_error=mq.orthogonality_error)


def composite_sweep(s: int, degrees, qr_tol: float = DEFAULT_QR_TOL,
                    rank_mode: str = "tolerance") -> list[CompositeRow]:
    """Composite benchmark over several degrees with N' = N."""
    return [composite_experiment(s, n, qr_tol=qr_tol, rank_mode=rank_mode)
            for n in degrees]


# ---------------------------------------------------------------------------
# heat network surrogate


class PipeComponent(ComponentModel):
    """Steady 1-D conduction pipe with random conductivity.

    Temperature is fixed to zero at the left end; the right end receives
    the coupling flux ``v2``.  Conductivity is a uniform background plus
    decaying sine modes weighted by the random inputs.  The discretization
    is second-order central differences on a uniform node grid with
    harmonic-mean conductivities at cell faces; the output is the
    right-end temperature.
    """

    def __init__(self, n_random: int, n_interior: int = 64,
                 kappa0: float = 1.0, sigma: float = 0.05):
        if n_random < 0:
            raise ValueError("n_random must be nonnegative")
        if n_interior < 2:
            raise ValueError("need at least two interior nodes")
        self.m_in = 1
        self.m_out = 1
        self.n_random = n_random
        self.n_interior = n_interior
        self.kappa0 = kappa0
        self.sigma = sigma
        self.h = 1.0 / (n_interior + 1)
        self.z = np.linspace(0.0, 1.0, n_interior + 2)
        modes = np.arange(1, n_random + 1)
        # rows: random inputs; columns: nodes
        self._mode_table = (sigma / modes)[:, None] * \
            np.sin(np.pi * np.outer(modes, self.z))

    @property
    def state_size(self) -> int:
        return self.n_interior + 2

    def conductivity(self, x_local: np.ndarray) -> np.ndarray:
        """Nodal conductivity for one realization of the random inputs."""
        x = np.asarray(x_local, dtype=float).ravel()
        if x.shape[0] != self.n_random:
            raise ValueError(f"expected {self.n_random} random inputs, "
                             f"got {x.shape[0]}")
        return self.kappa0 + x @ self._mode_table

    def _face_conductivity(self, x_local) -> np.ndarray:
        kn = self.conductivity(x_local)
        return 2.0 * kn[:-1] * kn[1:] / (kn[:-1] + kn[1:])

    def _operator(self, x_local):
        """Tridiagonal system rows (lower, diag, upper) of the residual.

        Interior rows are written as face-flux differences without the
        1/h^2 factor so residual entries stay O(1); the solution and the
        input sensitivities are unchanged by the row scaling.
        """
        kf = self._face_conductivity(x_local)
        n = self.n_interior
        lower = np.zeros(n + 2)
        diag = np.zeros(n + 2)
        upper = np.zeros(n + 2)
        diag[0] = 1.0
        lower[1:n + 1] = -kf[:n]
        diag[1:n + 1] = kf[:n] + kf[1:]
        upper[1:n + 1] = -kf[1:]
        lower[n + 1] = -kf[n] / self.h
        diag[n + 1] = kf[n] / self.h
        return lower, diag, upper

    def _rhs(self, v_in) -> np.ndarray:
        b = np.zeros(self.state_size)
        b[-1] = float(np.asarray(v_in).ravel()[0])
        return b

    def solve(self, v_in, x_local) -> np.ndarray:
        lower, diag, upper = self._operator(x_local)
        ab = np.zeros((3, self.state_size))
        ab[0, 1:] = upper[:-1]
        ab[1] = diag
        ab[2, :-1] = lower[1:]
        return solve_banded((1, 1), ab, self._rhs(v_in))

    def residual(self, u, v_in, x_local) -> np.ndarray:
        lower, diag, upper = self._operator(x_local)
        r = diag * u
        r[1:] += lower[1:] * u[:-1]
        r[:-1] += upper[:-1] * u[1:]
        return r - self._rhs(v_in)

    def residual_jac_state(self, u, v_in, x_local) -> np.ndarray:
        lower, diag, upper = self._operator(x_local)
        jac = np.diag(diag)
        idx = np.arange(self.state_size - 1)
        jac[idx + 1, idx] = lower[1:]
        jac[idx, idx + 1] = upper[:-1]
        return jac

    def residual_jac_input(self, u, v_in, x_local) -> np.ndarray:
        col = np.zeros((self.state_size, 1))
        col[-1, 0] = -1.0
        return col

    def output(self, u) -> np.ndarray:
        return np.array([u[-1]])

    def output_jac(self, u) -> np.ndarray:
        row = np.zeros((1, self.state_size))
        row[0, -1] = 1.0
        return row


class ReactorComponent(ComponentModel):
    """Steady 1-D diffusion with a cubic sink and a constant source.

    The left boundary temperature is the coupling input ``v1``; the right
    end is insulated (ghost-node reflection).  The output is the
    conductive flux back through the left boundary, evaluated with a
    second-order one-sided difference.  The component solves its own
    Newton iteration with backtracking; the initial iterate ramps from
    the boundary value to the reaction equilibrium.
    """

    def __init__(self, n_interior: int = 64, kappa: float = 1.0,
                 gamma: float = 1.0, source: float = 5.0,
                 newton_tol: float = 1e-12, max_newton: int = 50):
        if n_interior < 2:
            raise ValueError("need at least two interior nodes")
        self.m_in = 1
        self.m_out = 1
        self.n_random = 0
        self.n_interior = n_interior
        self.kappa = kappa
        self.gamma = gamma
        self.source = source
        self.newton_tol = newton_tol
        self.max_newton = max_newton
        self.h = 1.0 / (n_interior + 1)
        self.z = np.linspace(0.0, 1.0, n_interior + 2)

    @property
    def state_size(self) -> int:
        return self.n_interior + 2

    def equilibrium(self) -> float:
        """Temperature at which the cubic sink balances the source."""
        if self.gamma <= 0:
            return self.source
        return float(np.cbrt(self.source / self.gamma))

    def residual(self, u, v_in, x_local) -> np.ndarray:
        """Discrete equations with interior rows scaled by h^2.

        The scaling keeps entries O(1) so the inner Newton can meet a
        tight absolute tolerance; solutions and input sensitivities are
        unchanged by it.
        """
        v1 = float(np.asarray(v_in).ravel()[0])
        n = self.n_interior
        h2 = self.h * self.h
        r = np.empty(self.state_size)
        r[0] = u[0] - v1
        lap = u[2:n + 2] - 2.0 * u[1:n + 1] + u[:n]
        r[1:n + 1] = -self.kappa * lap \
            + h2 * (self.gamma * u[1:n + 1] ** 3 - self.source)
        r[n + 1] = -self.kappa * (2.0 * u[n] - 2.0 * u[n + 1]) \
            + h2 * (self.gamma * u[n + 1] ** 3 - self.source)
        return r

    def _jac_bands(self, u):
        n = self.n_interior
        h2 = self.h * self.h
        lower = np.zeros(self.state_size)
        diag = np.zeros(self.state_size)
        upper = np.zeros(self.state_size)
        diag[0] = 1.0
        lower[1:n + 1] = -self.kappa
        upper[1:n + 1] = -self.kappa
        diag[1:n + 1] = 2.0 * self.kappa \
            + 3.0 * h2 * self.gamma * u[1:n + 1] ** 2
        lower[n + 1] = -2.0 * self.kappa
        diag[n + 1] = 2.0 * self.kappa \
            + 3.0 * h2 * self.gamma * u[n + 1] ** 2
        return lower, diag, upper

    def residual_jac_state(self, u, v_in, x_local) -> np.ndarray:
        lower, diag, upper = self._jac_bands(u)
        jac = np.diag(diag)
        idx = np.arange(self.state_size - 1)
        jac[idx + 1, idx] = lower[1:]
        jac[idx, idx + 1] = upper[:-1]
        return jac

    def residual_jac_input(self, u, v_in, x_local) -> np.ndarray:
        col = np.zeros((self.state_size, 1))
        col[0, 0] = -1.0
        return col

    def solve(self, v_in, x_local) -> np.ndarray:
        v1 = float(np.asarray(v_in).ravel()[0])
        u = v1 + (self.equilibrium() - v1) * self.z
        r = self.residual(u, v_in, x_local)
        rnorm = np.max(np.abs(r))
        for _ in range(self.max_newton):
            # tolerance tracks the state scale; large boundary values push
            # the attainable residual floor up with them
            tol = self.newton_tol * (1.0 + np.max(np.abs(u)))
            if rnorm <= tol:
                return u
            lower, diag, upper = self._jac_bands(u)
            ab = np.zeros((3, self.state_size))
            ab[0, 1:] = upper[:-1]
            ab[1] = diag
            ab[2, :-1] = lower[1:]
            step = solve_banded((1, 1), ab, -r)
            t = 1.0
            for _ in range(40):
                trial = u + t * step
                r_trial = self.residual(trial, v_in, x_local)
                rnorm_trial = np.max(np.abs(r_trial))
                if rnorm_trial < (1.0 - 1e-4 * t) * rnorm or \
                        rnorm_trial <= tol:
                    break
                t *= 0.5
            u = u + t * step
            r = self.residual(u, v_in, x_local)
            rnorm = np.max(np.abs(r))
        if rnorm <= self.newton_tol * (1.0 + np.max(np.abs(u))):
            return u
        raise RuntimeError(
            f"reactor Newton stalled at residual {rnorm:.3e} "
            f"for boundary value {v1:.6g}")

    def output(self, u) -> np.ndarray:
        dtdz = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * self.h)
        return np.array([-self.kappa * dtdz])

    def output_jac(self, u) -> np.ndarray:
        row = np.zeros((1, self.state_size))
        row[0, 0] = 3.0 * self.kappa / (2.0 * self.h)
        row[0, 1] = -2.0 * self.kappa / self.h
        row[0, 2] = self.kappa / (2.0 * self.h)
        return row


class HeatNetworkProblem:
    """Conduction pipe coupled to a reaction column through two scalars.

    The pipe carries all ``s`` random inputs; the reactor is
    deterministic.  Coupling: the pipe's exit temperature feeds the
    reactor's boundary, the reactor's boundary flux feeds the pipe.
    """

    def __init__(self, s: int, n_interior: int = 64, kappa0: float = 1.0,
                 sigma: float = 0.05, reactor_kappa: float = 1.0,
                 gamma: float = 1.0, source: float = 5.0):
        if s < 1:
            raise ValueError("dimension s must be at least 1")
        self.s = s
        self.pipe = PipeComponent(n_random=s, n_interior=n_interior,
                                  kappa0=kappa0, sigma=sigma)
        self.reactor = ReactorComponent(n_interior=n_interior,
                                        kappa=reactor_kappa, gamma=gamma,
                                        source=source)

    def initial_guess(self) -> CouplingState:
        return CouplingState(np.array([2.0]), np.array([2.0]))

    def deterministic_coupling(self, tol: float = 1e-12
                               ) -> tuple[CouplingState, SolveTrace]:
        """Coupling values for the nominal inputs x = 0."""
        x0 = np.zeros(self.s)
        return eliminate_solve(self.pipe, self.reactor, x0,
                               self.initial_guess(), tol=tol)


@dataclass
class MonteCarloResult:
    """Coupling samples from repeated elimination solves."""

    v1: np.ndarray
    v2: np.ndarray
    seed: int

    @property
    def nsamples(self) -> int:
        return self.v1.shape[0]

    def mean_stderr(self, which: str = "v1") -> tuple[float, float]:
        vals = getattr(self, which)
        return float(np.mean(vals)), \
            float(np.std(vals, ddof=1) / np.sqrt(vals.shape[0]))

    def std_stderr(self, which: str = "v1") -> tuple[float, float]:
        sd = float(np.std(getattr(self, which), ddof=1))
        return sd, sd / np.sqrt(2.0 * (getattr(self, which).shape[0] - 1))


def monte_carlo_coupling(problem: HeatNetworkProblem, nsamples: int,
                         seed: int, tol: float = 1e-10) -> MonteCarloResult:
    """Sample the coupling variables by repeated elimination solves.

    Inputs are drawn uniformly on [-1, 1]^s with a seeded generator; the
    deterministic solution warm-starts every sample.
    """
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1.0, 1.0, size=(nsamples, problem.s))
    start, _ = problem.deterministic_coupling()
    v1 = np.empty(nsamples)
    v2 = np.empty(nsamples)

    def task(i: int):
        coupling, _ = eliminate_solve(problem.pipe, problem.reactor, x[i],
                                      start.copy(), tol=tol)
        v1[i] = coupling.v1[0]
        v2[i] = coupling.v2[0]

    run_indexed(task, nsamples)
    return MonteCarloResult(v1=v1, v2=v2, seed=seed)


@dataclass
class HeatNetworkResult:
    """Full and reduced Galerkin runs on the heat network at one s."""

    s: int
    basis_size: int
    npoints: int
    nreduced: int
    nonzeros: int
    solves_c1: int
    solves_c2: int
    time_c1: float
    time_c2: float
    full_state: GalerkinState
    full_trace: GalerkinTrace
    reduced_state: GalerkinState
    reduced_trace: GalerkinTrace


def heat_network_experiment(s: int, degree: int = 3,
                            reduced_degree: int | None = None,
                            qr_tol: float = DEFAULT_QR_TOL,
                            tol: float = 1e-10,
                            n_interior: int = 64) -> HeatNetworkResult:
    """Galerkin full vs. reduced-reactor runs at one input dimension.

    The reactor is the expensive nonlinear component, so it is the one
    sampled through the modified quadrature; its intermediates are the
    two coupling series (it has no random inputs of its own), which keeps
    the reduced space size independent of ``s``.  Reported solve counts
    and times come from the reduced run's Newton loop; the table's basis
    product count and nonzero count come from its final iteration.
    """
    if reduced_degree is None:
        reduced_degree = degree
    problem = HeatNetworkProblem(s, n_interior=n_interior)
    grid = tensor_gauss(s, degree + 1)
    basis = TensorBasis.total_degree(s, degree)
    psi = evaluate_basis(basis, grid.points)
    triples = triple_products(basis)

    start, _ = problem.deterministic_coupling()
    state0 = GalerkinState.constant(basis.size, start.v1, start.v2)

    full_state, full_trace = galerkin_newton(
        state0, problem.pipe, problem.reactor, grid, basis, tol=tol,
        psi=psi, triples=triples)
    reduced_state, reduced_trace = galerkin_newton_reduced(
        state0, problem.pipe, problem.reactor, grid, basis,
        reduced_degree=reduced_degree, reduce_which="component2",
        intermediates="couplings", qr_tol=qr_tol, tol=tol,
        psi=psi, triples=triples)

    last = reduced_trace.reductions[-1][-1]
    # the reduced-basis column reports the candidate count C(N'+2, 2);
    # degenerate iterations may orthonormalize fewer columns, visible in
    # the per-iteration reduction records
    return HeatNetworkResult(
        s=s, basis_size=basis.size, npoints=grid.npoints,
        nreduced=comb(reduced_degree + 2, 2), nonzeros=last.nonzero_count,
        solves_c1=reduced_trace.solves_c1,
        solves_c2=reduced_trace.solves_c2,
        time_c1=reduced_trace.time_c1, time_c2=reduced_trace.time_c2,
        full_state=full_state, full_trace=full_trace,
        reduced_state=reduced_state, reduced_trace=reduced_trace)
