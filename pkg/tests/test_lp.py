"""Tests for the phase-one simplex solver on standard-form problems."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from netuq.lp import (FEASIBILITY_TOL, InfeasibleProgramError, LPSolution,
                      StandardFormLP, phase_one_bfs)


def _random_feasible(rng, nrows, ncols, density=1.0):
    """Build A u = b with a known nonnegative solution."""
    a = rng.standard_normal((nrows, ncols))
    if density < 1.0:
        mask = rng.random((nrows, ncols)) < density
        a = np.where(mask, a, 0.0)
        a[np.arange(nrows), rng.permutation(ncols)[:nrows]] = 1.0
    u_feas = np.zeros(ncols)
    chosen = rng.permutation(ncols)[:nrows]
    u_feas[chosen] = rng.random(nrows) + 0.1
    return StandardFormLP(a, a @ u_feas)


@pytest.mark.parametrize("nrows,ncols,seed", [
    (3, 8, 0), (10, 25, 1), (25, 60, 2), (40, 200, 3),
])
def test_solver_finds_sparse_feasible_point(nrows, ncols, seed):
    """Solution is nonnegative, feasible, and supported on few columns."""
    rng = np.random.default_rng(seed)
    lp = _random_feasible(rng, nrows, ncols)
    sol = phase_one_bfs(lp)
    scale = 1.0 + np.abs(lp.rhs).max()
    assert np.all(sol.u >= 0.0)
    assert np.abs(lp.constraints @ sol.u - lp.rhs).max() <= FEASIBILITY_TOL * scale
    assert sol.nonzero_count <= nrows
    assert sol.residual <= FEASIBILITY_TOL * scale


def test_supporting_columns_linearly_independent():
    rng = np.random.default_rng(7)
    lp = _random_feasible(rng, 15, 50)
    sol = phase_one_bfs(lp)
    sub = lp.constraints[:, sol.support]
    assert np.linalg.matrix_rank(sub) == sub.shape[1]


def test_nonnegative_rhs_with_identity_block():
    a = np.hstack([np.eye(3), np.ones((3, 2))])
    b = np.array([1.0, 2.0, 3.0])
    sol = phase_one_bfs(StandardFormLP(a, b))
    assert_allclose(a @ sol.u, b, atol=1e-12)
    assert np.all(sol.u >= 0)


def test_negative_rhs_rows_are_handled():
    """Rows are sign-flipped internally; the returned point still satisfies A u = b."""
    a = np.array([[1.0, -1.0, 0.5], [0.0, 1.0, 2.0]])
    b = np.array([-2.0, 3.0])
    sol = phase_one_bfs(StandardFormLP(a, b))
    assert_allclose(a @ sol.u, b, atol=1e-10)
    assert np.all(sol.u >= 0)


def test_infeasible_program_raises():
    lp = StandardFormLP(np.array([[1.0, 1.0]]), np.array([-1.0]))
    with pytest.raises(InfeasibleProgramError):
        phase_one_bfs(lp)


def test_solution_support_properties():
    sol = LPSolution(u=np.array([0.0, 2.0, 0.0, 1.5]), basis=np.array([1, 3]),
                     iterations=4, residual=0.0)
    assert list(sol.support) == [1, 3]
    assert sol.nonzero_count == 2


def test_standard_form_validation():
    with pytest.raises(ValueError):
        StandardFormLP(np.ones(3), np.ones(3))
    with pytest.raises(ValueError):
        StandardFormLP(np.ones((3, 2)), np.ones(3))
    with pytest.raises(ValueError):
        StandardFormLP(np.ones((2, 4)), np.ones(3))
    with pytest.raises(ValueError):
        StandardFormLP(np.array([[1.0, np.nan]]), np.ones(1))


def test_degenerate_problem_terminates():
    """Many redundant-looking columns with b = 0 must not cycle."""
    rng = np.random.default_rng(11)
    a = np.repeat(rng.standard_normal((4, 5)), 3, axis=1)
    sol = phase_one_bfs(StandardFormLP(a, np.zeros(4)))
    assert_allclose(sol.u, 0.0, atol=1e-12)
