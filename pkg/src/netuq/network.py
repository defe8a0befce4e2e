"""Deterministic solvers for two-component coupled networks.

Each component solves its own state equation ``f(u, v_in, x_local) = 0``
given the coupling input it receives, and exposes an output ``g(u)`` that
feeds the other component.  A network solve finds coupling values
``(v1, v2)`` with ``v1 = g1(u1(v2))`` and ``v2 = g2(u2(v1))``.

Three solvers are provided: Newton on the eliminated interface system
(one inner solve of each component per iteration plus sensitivity
back-solves), Newton on the full augmented system (states and couplings
together, used as a cross-check), and block Gauss-Seidel relaxation
(cheap, but only converges for weak coupling).
"""

from __future__ import annotations

import abc
import time
from dataclasses import dataclass, field

import numpy as np


class NonconvergenceError(RuntimeError):
    """An iteration failed to reach its residual tolerance."""

    def __init__(self, message: str, trace: "SolveTrace | None" = None):
        super().__init__(message)
        self.trace = trace


class ComponentModel(abc.ABC):
    """Behavioral contract for one network component.

    Concrete models must set ``m_in`` (coupling inputs received), ``m_out``
    (coupling outputs produced) and ``n_random`` (number of local random
    coordinates), and implement the state-equation surface below.  The
    default :meth:`sensitivity` derives coupling derivatives through the
    implicit function theorem with multi-right-hand-side solves against
    the component Jacobian.
    """

    m_in: int
    m_out: int
    n_random: int

    @abc.abstractmethod
    def solve(self, v_in: np.ndarray, x_local: np.ndarray) -> np.ndarray:
        """State ``u`` with ``|f(u, v_in, x_local)|_inf`` below the
        component's own tolerance."""

    @abc.abstractmethod
    def output(self, u: np.ndarray) -> np.ndarray:
        """Coupling output ``g(u)``, shape ``(m_out,)``."""

    @abc.abstractmethod
    def residual(self, u: np.ndarray, v_in: np.ndarray,
                 x_local: np.ndarray) -> np.ndarray:
        """State-equation residual ``f(u, v_in, x_local)``."""

    @abc.abstractmethod
    def residual_jac_state(self, u: np.ndarray, v_in: np.ndarray,
                           x_local: np.ndarray) -> np.ndarray:
        """``df/du``, shape ``(n, n)``."""

    @abc.abstractmethod
    def residual_jac_input(self, u: np.ndarray, v_in: np.ndarray,
                           x_local: np.ndarray) -> np.ndarray:
        """``df/dv_in``, shape ``(n, m_in)``."""

    @abc.abstractmethod
    def output_jac(self, u: np.ndarray) -> np.ndarray:
        """``dg/du``, shape ``(m_out, n)``."""

    def sensitivity(self, u: np.ndarray, v_in: np.ndarray,
                    x_local: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Derivatives ``(du/dv_in, dg/dv_in)`` at a solved state."""
        dfdu = self.residual_jac_state(u, v_in, x_local)
        dfdv = self.residual_jac_input(u, v_in, x_local)
        du_dv = -np.linalg.solve(dfdu, dfdv)
        dg_dv = self.output_jac(u) @ du_dv
        return du_dv, dg_dv


@dataclass
class CouplingState:
    """Coupling values exchanged between the two components."""

    v1: np.ndarray
    v2: np.ndarray

    def __post_init__(self):
        self.v1 = np.atleast_1d(np.asarray(self.v1, dtype=float)).copy()
        self.v2 = np.atleast_1d(np.asarray(self.v2, dtype=float)).copy()

    def copy(self) -> "CouplingState":
        return CouplingState(self.v1.copy(), self.v2.copy())


@dataclass
class SolveTrace:
    """Per-iteration residuals and per-component work counters."""

    residuals: list[float] = field(default_factory=list)
    solves_c1: int = 0
    solves_c2: int = 0
    time_c1: float = 0.0
    time_c2: float = 0.0
    converged: bool = False

    @property
    def iterations(self) -> int:
        return len(self.residuals)


@dataclass
class AugmentedSolution:
    """Full solution of the augmented system: states plus couplings."""

    u1: np.ndarray
    u2: np.ndarray
    coupling: CouplingState
    trace: SolveTrace


def split_inputs(x: np.ndarray, c1: ComponentModel,
                 c2: ComponentModel) -> tuple[np.ndarray, np.ndarray]:
    """Split a full random point into the two components' local blocks."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape[0] != c1.n_random + c2.n_random:
        raise ValueError(
            f"expected {c1.n_random + c2.n_random} random coordinates, "
            f"got {x.shape[0]}")
    return x[:c1.n_random], x[c1.n_random:]


def _timed_solve(comp: ComponentModel, v_in, x_local, trace: SolveTrace,
                 which: int) -> np.ndarray:
    start = time.perf_counter()
    u = comp.solve(v_in, x_local)
    elapsed = time.perf_counter() - start
    if which == 1:
        trace.solves_c1 += 1
        trace.time_c1 += elapsed
    else:
        trace.solves_c2 += 1
        trace.time_c2 += elapsed
    return u


def eliminate_solve(c1: ComponentModel, c2: ComponentModel, x: np.ndarray,
                    initial: CouplingState, tol: float = 1e-10,
                    max_iter: int = 50) -> tuple[CouplingState, SolveTrace]:
    """Newton iteration on the eliminated interface system.

    Each iteration solves both components once at the current couplings,
    evaluates the interface residual ``(v1 - g1(u1), v2 - g2(u2))``, and
    if not yet converged takes a Newton step with the coupling Jacobian
    obtained from the components' sensitivity surfaces.  The residual is
    always the one formed from the freshly solved states against the
    couplings they were solved at.
    """
    x1, x2 = split_inputs(x, c1, c2)
    v1 = np.atleast_1d(np.asarray(initial.v1, dtype=float)).copy()
    v2 = np.atleast_1d(np.asarray(initial.v2, dtype=float)).copy()
    m1, m2 = c1.m_out, c2.m_out
    trace = SolveTrace()
    for _ in range(max_iter):
        u1 = _timed_solve(c1, v2, x1, trace, 1)
        u2 = _timed_solve(c2, v1, x2, trace, 2)
        r1 = v1 - c1.output(u1)
        r2 = v2 - c2.output(u2)
        res = max(np.max(np.abs(r1)), np.max(np.abs(r2)))
        trace.residuals.append(float(res))
        if not np.isfinite(res):
            raise NonconvergenceError(
                "interface residual became non-finite", trace)
        if res <= tol:
            trace.converged = True
            return CouplingState(v1, v2), trace
        _, dg1 = c1.sensitivity(u1, v2, x1)   # d g1 / d v2
        _, dg2 = c2.sensitivity(u2, v1, x2)   # d g2 / d v1
        jac = np.block([
            [np.eye(m1), -dg1],
            [-dg2, np.eye(m2)],
        ])
        delta = np.linalg.solve(jac, -np.concatenate([r1, r2]))
        v1 = v1 + delta[:m1]
        v2 = v2 + delta[m1:]
    raise NonconvergenceError(
        f"interface Newton did not reach tol={tol:.1e} in {max_iter} "
        f"iterations (last residual {trace.residuals[-1]:.3e})", trace)


def augmented_newton(c1: ComponentModel, c2: ComponentModel, x: np.ndarray,
                     initial: CouplingState, tol: float = 1e-10,
                     max_iter: int = 50) -> AugmentedSolution:
    """Newton on the monolithic system over ``(u1, u2, v1, v2)``.

    The four-block Jacobian couples each component's state equation to the
    opposite coupling variable and ties the couplings to the outputs.
    States are initialized by one solve of each component at the initial
    couplings.  This solver exists as an independent cross-check for
    :func:`eliminate_solve`; both converge to the same interface values.
    """
    x1, x2 = split_inputs(x, c1, c2)
    v1 = np.atleast_1d(np.asarray(initial.v1, dtype=float)).copy()
    v2 = np.atleast_1d(np.asarray(initial.v2, dtype=float)).copy()
    m1, m2 = c1.m_out, c2.m_out
    trace = SolveTrace()
    u1 = _timed_solve(c1, v2, x1, trace, 1)
    u2 = _timed_solve(c2, v1, x2, trace, 2)
    n1, n2 = u1.shape[0], u2.shape[0]

    for _ in range(max_iter):
        f1 = c1.residual(u1, v2, x1)
        f2 = c2.residual(u2, v1, x2)
        r1 = v1 - c1.output(u1)
        r2 = v2 - c2.output(u2)
        full = np.concatenate([f1, f2, r1, r2])
        res = float(np.max(np.abs(full)))
        trace.residuals.append(res)
        if not np.isfinite(res):
            raise NonconvergenceError(
                "augmented residual became non-finite", trace)
        if res <= tol:
            trace.converged = True
            return AugmentedSolution(u1, u2, CouplingState(v1, v2), trace)

        jac = np.zeros((n1 + n2 + m1 + m2, n1 + n2 + m1 + m2))
        r0, r1b, r2b, r3 = 0, n1, n1 + n2, n1 + n2 + m1
        jac[r0:r1b, r0:r1b] = c1.residual_jac_state(u1, v2, x1)
        jac[r0:r1b, r3:] = c1.residual_jac_input(u1, v2, x1)
        jac[r1b:r2b, r1b:r2b] = c2.residual_jac_state(u2, v1, x2)
        jac[r1b:r2b, r2b:r3] = c2.residual_jac_input(u2, v1, x2)
        jac[r2b:r3, r0:r1b] = -c1.output_jac(u1)
        jac[r2b:r3, r2b:r3] = np.eye(m1)
        jac[r3:, r1b:r2b] = -c2.output_jac(u2)
        jac[r3:, r3:] = np.eye(m2)

        delta = np.linalg.solve(jac, -full)
        u1 = u1 + delta[r0:r1b]
        u2 = u2 + delta[r1b:r2b]
        v1 = v1 + delta[r2b:r3]
        v2 = v2 + delta[r3:]
    raise NonconvergenceError(
        f"augmented Newton did not reach tol={tol:.1e} in {max_iter} "
        f"iterations (last residual {trace.residuals[-1]:.3e})", trace)


def gauss_seidel_relax(c1: ComponentModel, c2: ComponentModel, x: np.ndarray,
                       initial: CouplingState, tol: float = 1e-10,
                       max_iter: int = 200,
                       divergence_factor: float = 1e8
                       ) -> tuple[CouplingState, SolveTrace]:
    """Block Gauss-Seidel sweeps over the two components.

    Each sweep propagates component 1's fresh output straight into
    component 2.  The interface residual is evaluated at the current
    couplings before every sweep, so a decoupled network (constant
    outputs) converges after a single update.  The iteration has no
    damping and legitimately diverges for strongly coupled networks; a
    residual blowing up past ``divergence_factor`` times its initial
    value aborts early.
    """
    x1, x2 = split_inputs(x, c1, c2)
    v1 = np.atleast_1d(np.asarray(initial.v1, dtype=float)).copy()
    v2 = np.atleast_1d(np.asarray(initial.v2, dtype=float)).copy()
    trace = SolveTrace()
    first_res = None
    for _ in range(max_iter):
        try:
            u1 = _timed_solve(c1, v2, x1, trace, 1)
            u2 = _timed_solve(c2, v1, x2, trace, 2)
        except RuntimeError as exc:
            # a component blowing up under wild coupling values is the
            # relaxation diverging, not a library failure
            raise NonconvergenceError(
                f"component solve failed during relaxation ({exc})",
                trace) from exc
        g1 = c1.output(u1)
        r1 = v1 - g1
        r2 = v2 - c2.output(u2)
        res = max(np.max(np.abs(r1)), np.max(np.abs(r2)))
        trace.residuals.append(float(res))
        if first_res is None:
            first_res = max(res, 1.0)
        if res <= tol:
            trace.converged = True
            return CouplingState(v1, v2), trace
        if not np.isfinite(res) or res > divergence_factor * first_res:
            raise NonconvergenceError(
                f"Gauss-Seidel relaxation diverged (residual {res:.3e})",
                trace)
        v1 = g1
        try:
            u2 = _timed_solve(c2, v1, x2, trace, 2)
        except RuntimeError as exc:
            raise NonconvergenceError(
                f"component solve failed during relaxation ({exc})",
                trace) from exc
        v2 = c2.output(u2)
    raise NonconvergenceError(
        f"Gauss-Seidel relaxation did not reach tol={tol:.1e} in "
        f"{max_iter} sweeps (last residual {trace.residuals[-1]:.3e})", trace)
