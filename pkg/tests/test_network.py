"""Tests for the coupled two-component solvers."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from netuq.models import HeatNetworkProblem
from netuq.network import (AugmentedSolution, ComponentModel, CouplingState,
                           NonconvergenceError, augmented_newton,
                           eliminate_solve, gauss_seidel_relax, split_inputs)


class _LinearComponent(ComponentModel):
    """Affine state equation with closed-form everything, for exact checks."""

    def __init__(self, mat, base, in_gain, x_gain, out_vec):
        self.mat = np.asarray(mat, dtype=float)
        self.base = np.asarray(base, dtype=float)
        self.in_gain = np.asarray(in_gain, dtype=float)
        self.x_gain = np.asarray(x_gain, dtype=float)
        self.out_vec = np.asarray(out_vec, dtype=float)
        self.m_in = self.in_gain.shape[1]
        self.m_out = self.out_vec.shape[0]
        self.n_random = self.x_gain.shape[1]

    def _rhs(self, v_in, x_local):
        return self.base + self.in_gain @ v_in + self.x_gain @ x_local

    def solve(self, v_in, x_local):
        return np.linalg.solve(self.mat, self._rhs(v_in, x_local))

    def output(self, u):
        return self.out_vec @ u

    def residual(self, u, v_in, x_local):
        return self.mat @ u - self._rhs(v_in, x_local)

    def residual_jac_state(self, u, v_in, x_local):
        return self.mat

    def residual_jac_input(self, u, v_in, x_local):
        return -self.in_gain

    def output_jac(self, u):
        return self.out_vec


@pytest.fixture
def linear_pair():
    c1 = _LinearComponent(mat=[[2.0, 0.3], [0.1, 1.5]], base=[1.0, -0.5],
                          in_gain=[[0.4], [0.2]], x_gain=[[0.7], [-0.3]],
                          out_vec=[[1.0, 1.0]])
    c2 = _LinearComponent(mat=[[3.0]], base=[0.8], in_gain=[[0.5]],
                          x_gain=[[0.2]], out_vec=[[2.0]])
    return c1, c2


def _exact_couplings(c1, c2, x):
    """Solve the affine interface system by direct linear algebra."""
    x1, x2 = x[:1], x[1:]
    t1 = c1.out_vec @ np.linalg.solve(c1.mat, np.eye(2))
    a1 = (t1 @ (c1.base + c1.x_gain @ x1))[0]
    k1 = (t1 @ c1.in_gain)[0, 0]
    t2 = c2.out_vec @ np.linalg.solve(c2.mat, np.eye(1))
    a2 = (t2 @ (c2.base + c2.x_gain @ x2))[0]
    k2 = (t2 @ c2.in_gain)[0, 0]
    sol = np.linalg.solve(np.array([[1.0, -k1], [-k2, 1.0]]),
                          np.array([a1, a2]))
    return sol[0], sol[1]


def test_elimination_hits_exact_affine_solution(linear_pair):
    c1, c2 = linear_pair
    x = np.array([0.3, -0.8])
    v1_exact, v2_exact = _exact_couplings(c1, c2, x)
    cs, trace = eliminate_solve(c1, c2, x, CouplingState([0.0], [0.0]))
    assert trace.converged
    assert_allclose(cs.v1[0], v1_exact, rtol=1e-12)
    assert_allclose(cs.v2[0], v2_exact, rtol=1e-12)
    assert trace.iterations == 2  # one Newton step suffices on affine models


def test_sensitivity_matches_finite_differences(linear_pair):
    c1, _ = linear_pair
    v_in = np.array([0.7])
    x1 = np.array([0.2])
    u = c1.solve(v_in, x1)
    du_dv, dg_dv = c1.sensitivity(u, v_in, x1)
    eps = 1e-6
    u_plus = c1.solve(v_in + eps, x1)
    assert_allclose(du_dv[:, 0], (u_plus - u) / eps, rtol=1e-5)
    assert_allclose(dg_dv[:, 0],
                    (c1.output(u_plus) - c1.output(u)) / eps, rtol=1e-5)


def test_augmented_matches_elimination(linear_pair):
    c1, c2 = linear_pair
    x = np.array([-0.5, 0.9])
    cs, _ = eliminate_solve(c1, c2, x, CouplingState([0.0], [0.0]))
    aug = augmented_newton(c1, c2, x, CouplingState([0.0], [0.0]))
    assert isinstance(aug, AugmentedSolution)
    assert_allclose(aug.coupling.v1, cs.v1, atol=1e-10)
    assert_allclose(aug.coupling.v2, cs.v2, atol=1e-10)
    assert np.abs(c1.residual(aug.u1, aug.coupling.v2, x[:1])).max() < 1e-10


def test_split_inputs_validates_length(linear_pair):
    c1, c2 = linear_pair
    with pytest.raises(ValueError):
        split_inputs(np.zeros(3), c1, c2)
    x1, x2 = split_inputs(np.array([1.0, 2.0]), c1, c2)
    assert_allclose(x1, [1.0])
    assert_allclose(x2, [2.0])


def test_trace_counts_component_work(linear_pair):
    c1, c2 = linear_pair
    _, trace = eliminate_solve(c1, c2, np.zeros(2), CouplingState([0.0], [0.0]))
    assert trace.solves_c1 == trace.iterations
    assert trace.solves_c2 == trace.iterations
    assert trace.time_c1 >= 0.0 and trace.time_c2 >= 0.0


def test_iteration_cap_raises_with_trace(linear_pair):
    c1, c2 = linear_pair
    with pytest.raises(NonconvergenceError) as info:
        eliminate_solve(c1, c2, np.zeros(2), CouplingState([100.0], [100.0]),
                        tol=1e-10, max_iter=1)
    assert info.value.trace is not None
    assert info.value.trace.iterations == 1


def test_heat_network_nominal_coupling():
    """At the nominal inputs both couplings equal the fixed point."""
    problem = HeatNetworkProblem(4)
    cs, trace = problem.deterministic_coupling()
    assert trace.converged
    assert_allclose(cs.v1, cs.v2, atol=1e-11)
    assert_allclose(cs.v1[0], 2.43010144, atol=5e-7)
    assert cs.v1[0] > 0


def test_heat_network_newton_tail_is_superlinear():
    _, trace = HeatNetworkProblem(4).deterministic_coupling()
    assert trace.iterations >= 3
    assert trace.residuals[-1] <= 0.1 * trace.residuals[-2]


def test_heat_network_second_order_in_grid():
    """Halving the mesh width shrinks the coupling error about fourfold."""
    vals = [HeatNetworkProblem(2, n_interior=n).deterministic_coupling()[0].v1[0]
            for n in (32, 64, 128)]
    ratio = (vals[0] - vals[1]) / (vals[1] - vals[2])
    assert 3.2 <= ratio <= 4.5


def test_heat_network_random_point_cross_check():
    """Elimination and the monolithic solver agree off the nominal point."""
    problem = HeatNetworkProblem(4)
    rng = np.random.default_rng(3)
    x = rng.uniform(-1.0, 1.0, 4)
    cs, _ = eliminate_solve(problem.pipe, problem.reactor, x,
                            problem.initial_guess(), tol=1e-12)
    aug = augmented_newton(problem.pipe, problem.reactor, x,
                           problem.initial_guess(), tol=1e-12)
    assert_allclose(cs.v1, aug.coupling.v1, atol=1e-10)
    assert_allclose(cs.v2, aug.coupling.v2, atol=1e-10)


def test_relaxation_diverges_on_strong_reaction():
    """Undamped sweeps blow up when the reaction feedback is stiff."""
    problem = HeatNetworkProblem(2)
    with pytest.raises(NonconvergenceError) as info:
        gauss_seidel_relax(problem.pipe, problem.reactor, np.zeros(2),
                           problem.initial_guess())
    assert info.value.trace is not None
    assert info.value.trace.iterations > 0


def test_relaxation_converges_on_weak_reaction():
    problem = HeatNetworkProblem(2, gamma=0.005)
    cs, trace = gauss_seidel_relax(problem.pipe, problem.reactor, np.zeros(2),
                                   problem.initial_guess())
    assert trace.converged
    assert trace.iterations == 17
    assert_allclose(cs.v1[0], -5.251618, atol=1e-5)


def test_relaxation_immediate_on_decoupled_network():
    """With no reaction the boundary flux is constant: -source holds exactly."""
    problem = HeatNetworkProblem(2, gamma=0.0)
    cs, trace = gauss_seidel_relax(problem.pipe, problem.reactor, np.zeros(2),
                                   problem.initial_guess())
    assert trace.converged
    assert trace.iterations <= 3
    assert_allclose(cs.v1[0], -5.0, atol=1e-10)
    assert_allclose(cs.v2[0], -5.0, atol=1e-10)
