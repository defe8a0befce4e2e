"""Tests for the benchmark problems and their experiment drivers."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from netuq.models import (CompositeFunctionProblem, HeatNetworkProblem,
                          PipeComponent, ReactorComponent,
                          composite_experiment, composite_reference,
                          composite_sweep, heat_network_experiment,
                          monte_carlo_coupling)
from netuq.quadrature import tensor_gauss


def test_composite_intermediates_band():
    """The reciprocal intermediate stays inside its analytic envelope."""
    problem = CompositeFunctionProblem(4)
    lo, hi = problem.y2_bounds
    assert 0.0817 < lo < hi < 0.1275
    grid = tensor_gauss(4, 5)
    y = problem.intermediates(grid.points)
    assert np.all(y[:, 1] >= lo - 1e-15)
    assert np.all(y[:, 1] <= hi + 1e-15)
    assert_allclose(y[:, 0], grid.points[:, 0])


def test_composite_response_positive_and_smooth():
    problem = CompositeFunctionProblem(4)
    rng = np.random.default_rng(0)
    x = rng.uniform(-1.0, 1.0, (100, 4))
    h = problem.response(problem.intermediates(x))
    assert np.all(h > 0)
    assert h.max() < np.e ** 1.2


def test_composite_validates_dimension():
    with pytest.raises(ValueError):
        CompositeFunctionProblem(0)
    problem = CompositeFunctionProblem(3)
    with pytest.raises(ValueError):
        problem.intermediates(np.zeros((5, 4)))


def test_composite_reference_mean_coefficient():
    """The zeroth reference coefficient is the grid mean of the response."""
    problem = CompositeFunctionProblem(2)
    ref = composite_reference(2)
    grid = tensor_gauss(2, 9)
    h = problem.response(problem.intermediates(grid.points))
    assert_allclose(ref[0], grid.weights @ h, rtol=1e-13)
    assert ref.shape == (45,)


def test_composite_reference_graded_prefix_alignment():
    """Graded ordering lines lower-degree coefficients up as a prefix;
    different grids only disagree at the aliasing level."""
    ref = composite_reference(2, degree=6)
    low = composite_reference(2, degree=4)
    assert_allclose(ref[:low.shape[0]], low, atol=1e-4)
    returned = composite_reference(2, degree=6)
    assert returned is not ref
    assert_allclose(returned, ref)


def test_composite_experiment_structural_counts():
    row = composite_experiment(4, 3)
    assert row.basis_size == 35
    assert row.npoints == 256
    assert row.nreduced == 10


def test_composite_experiment_first_degree_row():
    """Five points reproduce the full-grid projection to transfer accuracy."""
    row = composite_experiment(4, 1)
    assert row.nonzeros == 5
    assert_allclose(row.err_full, 2.9334e-2, rtol=1e-3)
    assert_allclose(row.err_reduced, row.err_full, atol=1e-5)
    assert row.orth_error < 1e-12


def test_composite_experiment_error_decreases_with_degree():
    errs = [composite_experiment(4, n).err_full for n in (1, 2, 3)]
    assert errs[0] > errs[1] > errs[2]


def test_composite_experiment_fixed_rank_mode():
    row = composite_experiment(4, 2, rank_mode="fixed-rank")
    assert row.nonzeros <= 15


def test_composite_experiment_validates_arguments():
    with pytest.raises(ValueError):
        composite_experiment(4, 0)
    with pytest.raises(ValueError):
        composite_experiment(4, 9)
    with pytest.raises(ValueError):
        composite_experiment(4, 2, rank_mode="loose")


def test_composite_sweep_covers_requested_degrees():
    rows = composite_sweep(2, range(1, 4))
    assert [r.degree for r in rows] == [1, 2, 3]


def test_pipe_output_is_resistance_times_flux():
    """At nominal conductivity the exit temperature equals the flux exactly."""
    pipe = PipeComponent(n_random=3)
    x0 = np.zeros(3)
    for flux in (2.0, -5.0, 0.3):
        u = pipe.solve(np.array([flux]), x0)
        assert_allclose(pipe.output(u)[0], flux, rtol=1e-12)


def test_pipe_conductivity_positive_everywhere():
    pipe = PipeComponent(n_random=6)
    rng = np.random.default_rng(5)
    for _ in range(20):
        kappa = pipe.conductivity(rng.uniform(-1.0, 1.0, 6))
        assert np.all(kappa > 0.5)


def test_reactor_equilibrium_value():
    assert_allclose(ReactorComponent().equilibrium(), np.cbrt(5.0), rtol=1e-14)
    assert_allclose(ReactorComponent(gamma=0.0).equilibrium(), 5.0)


def test_reactor_without_reaction_returns_source_flux():
    """With the cubic sink off, the flux equals minus the integrated source."""
    reactor = ReactorComponent(gamma=0.0)
    for v1 in (0.0, 2.0, -3.0):
        u = reactor.solve(np.array([v1]), np.zeros(0))
        assert_allclose(reactor.output(u)[0], -5.0, atol=1e-9)


def test_reactor_residual_small_at_solution():
    reactor = ReactorComponent()
    v1 = np.array([2.4])
    u = reactor.solve(v1, np.zeros(0))
    res = reactor.residual(u, v1, np.zeros(0))
    assert np.abs(res).max() < 1e-11


def test_heat_network_validates_dimension():
    with pytest.raises(ValueError):
        HeatNetworkProblem(0)


def test_monte_carlo_reproducible_and_summarized():
    problem = HeatNetworkProblem(2)
    mc1 = monte_carlo_coupling(problem, 40, seed=11)
    mc2 = monte_carlo_coupling(problem, 40, seed=11)
    assert np.array_equal(mc1.v1, mc2.v1)
    assert np.array_equal(mc1.v2, mc2.v2)
    assert mc1.nsamples == 40
    mean, stderr = mc1.mean_stderr("v1")
    assert abs(mean - 2.43) < 0.02
    assert 0 < stderr < 0.01
    sd, sd_err = mc1.std_stderr("v1")
    assert 0 < sd_err < sd


def test_heat_network_experiment_smoke():
    """Reduced run agrees with the full run and never works harder."""
    res = heat_network_experiment(2)
    assert res.nreduced == 10
    assert res.nonzeros <= res.npoints
    assert res.solves_c2 < res.full_trace.solves_c2
    assert res.reduced_trace.converged and res.full_trace.converged
    assert np.abs(res.full_state.vhat1 - res.reduced_state.vhat1).max() < 1e-6
    assert np.abs(res.full_state.vhat2 - res.reduced_state.vhat2).max() < 1e-6
