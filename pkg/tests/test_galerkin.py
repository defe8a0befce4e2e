"""Tests for the intrusive projection solver and its reduced variant."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

import netuq.galerkin
from netuq.chaos import TensorBasis, evaluate_basis
from netuq.galerkin import (GalerkinState, ReductionRecord, galerkin_newton,
                            galerkin_newton_reduced, galerkin_residual,
                            triple_products)
from netuq.models import HeatNetworkProblem
from netuq.network import NonconvergenceError
from netuq.pseudospectral import moments
from netuq.quadrature import tensor_gauss
from netuq.reduction import ReductionFailureError


def test_triple_products_reduce_to_gram_with_constant():
    """Multiplying by the constant basis function recovers orthonormality."""
    basis = TensorBasis.total_degree(2, 3)
    dense = triple_products(basis).as_dense()
    assert_allclose(dense[0], np.eye(basis.size), atol=1e-14)


def test_triple_products_known_univariate_value():
    """<psi_1 psi_1 psi_2> = 2/sqrt(5) for normalized Legendre."""
    basis = TensorBasis.total_degree(1, 2)
    dense = triple_products(basis).as_dense()
    assert_allclose(dense[1, 1, 2], 2.0 / np.sqrt(5.0), rtol=1e-14)
    assert_allclose(dense[1, 1, 1], 0.0, atol=1e-14)


def test_triple_products_symmetric_in_all_indices():
    basis = TensorBasis.total_degree(2, 2)
    dense = triple_products(basis).as_dense()
    assert_allclose(dense, dense.transpose(1, 0, 2), atol=1e-15)
    assert_allclose(dense, dense.transpose(0, 2, 1), atol=1e-15)


def test_triple_products_match_direct_quadrature():
    basis = TensorBasis.total_degree(2, 2)
    grid = tensor_gauss(2, 5)
    psi = evaluate_basis(basis, grid.points)
    direct = np.einsum("qi,qj,qk,q->ijk", psi, psi, psi, grid.weights)
    assert_allclose(triple_products(basis).as_dense(), direct, atol=1e-13)


def test_degenerate_case_reproduces_pointwise_solve():
    """One basis function and one grid point: exactly the nominal network."""
    problem = HeatNetworkProblem(1)
    basis = TensorBasis.total_degree(1, 0)
    grid = tensor_gauss(1, 1)
    state0 = GalerkinState.constant(1, 2.0, 2.0)
    state, trace = galerkin_newton(state0, problem.pipe, problem.reactor,
                                   grid, basis)
    assert trace.converged
    cs, _ = problem.deterministic_coupling()
    assert_allclose(state.vhat1[0, 0], cs.v1[0], atol=1e-9)
    assert_allclose(state.vhat2[0, 0], cs.v2[0], atol=1e-9)


def test_residual_vanishes_at_converged_state():
    problem = HeatNetworkProblem(2)
    basis = TensorBasis.total_degree(2, 2)
    grid = tensor_gauss(2, 3)
    state0 = GalerkinState.constant(basis.size, 2.0, 2.0)
    state, _ = galerkin_newton(state0, problem.pipe, problem.reactor,
                               grid, basis, tol=1e-11)
    h1, h2 = galerkin_residual(state, problem.pipe, problem.reactor,
                               grid, basis)
    assert max(np.abs(h1).max(), np.abs(h2).max()) <= 1e-11


def test_residual_of_deterministic_network_lives_in_mean_row():
    """With zero conductivity spread all randomness disappears, so every
    residual coefficient beyond the mean row is zero."""
    problem = HeatNetworkProblem(2, sigma=0.0)
    basis = TensorBasis.total_degree(2, 2)
    grid = tensor_gauss(2, 3)
    state = GalerkinState.constant(basis.size, 2.0, 2.0)
    h1, h2 = galerkin_residual(state, problem.pipe, problem.reactor,
                               grid, basis)
    assert np.abs(h1[1:]).max() < 1e-12
    assert np.abs(h2[1:]).max() < 1e-12
    assert abs(h2[0, 0]) > 1e-3  # the nominal interface mismatch survives


@pytest.fixture(scope="module")
def heat_galerkin():
    """Converged full-quadrature solve shared by the slower checks."""
    problem = HeatNetworkProblem(2)
    basis = TensorBasis.total_degree(2, 3)
    grid = tensor_gauss(2, 4)
    state0 = GalerkinState.constant(basis.size, 2.0, 2.0)
    state, trace = galerkin_newton(state0, problem.pipe, problem.reactor,
                                   grid, basis)
    return problem, basis, grid, state0, state, trace


def test_heat_network_galerkin_moments(heat_galerkin):
    _, _, _, _, state, trace = heat_galerkin
    assert trace.converged
    mean, var = moments(state.vhat1[:, 0])
    assert_allclose(mean, 2.42999112, atol=1e-6)
    assert_allclose(np.sqrt(var), 0.015866, atol=1e-4)


def test_full_quadrature_work_accounting(heat_galerkin):
    _, _, grid, _, _, trace = heat_galerkin
    assert trace.iter_solves_c1 == [grid.npoints] * trace.iterations
    assert trace.solves_c2 == grid.npoints * trace.iterations


def test_reduced_matches_full_quadrature(heat_galerkin):
    problem, basis, grid, state0, state, _ = heat_galerkin
    reduced_state, trace = galerkin_newton_reduced(
        state0, problem.pipe, problem.reactor, grid, basis, reduced_degree=3)
    assert trace.converged
    assert_allclose(reduced_state.vhat1, state.vhat1, atol=1e-10)
    assert_allclose(reduced_state.vhat2, state.vhat2, atol=1e-10)


def test_reduced_first_iteration_collapses_to_one_point(heat_galerkin):
    """A constant starting state gives constant intermediates, so the first
    reduction keeps a single basis term and a single grid point."""
    problem, basis, grid, state0, _, _ = heat_galerkin
    _, trace = galerkin_newton_reduced(
        state0, problem.pipe, problem.reactor, grid, basis, reduced_degree=3)
    first = trace.reductions[0][0]
    assert first.component == 2
    assert first.nterms == 1
    assert first.nonzero_count == 1
    assert not first.fallback
    assert trace.iter_solves_c2[0] == 1
    assert max(trace.iter_solves_c2) < grid.npoints


def test_reduction_failure_falls_back_to_full_sampling(heat_galerkin, monkeypatch):
    problem, basis, grid, state0, state, _ = heat_galerkin

    def always_fail(phi, weights, qr_tol=None, **kwargs):
        raise ReductionFailureError("forced failure")

    monkeypatch.setattr(netuq.galerkin, "reduced_weights", always_fail)
    with pytest.warns(UserWarning, match="falling back"):
        fallback_state, trace = galerkin_newton_reduced(
            state0, problem.pipe, problem.reactor, grid, basis,
            reduced_degree=3)
    assert trace.converged
    records = [r for recs in trace.reductions for r in recs]
    assert records and all(r.fallback for r in records)
    assert all(r.nonzero_count == grid.npoints for r in records)
    assert_allclose(fallback_state.vhat1, state.vhat1, atol=1e-9)


def test_reduced_validates_arguments(heat_galerkin):
    problem, basis, grid, state0, _, _ = heat_galerkin
    with pytest.raises(ValueError, match="reduce_which"):
        galerkin_newton_reduced(state0, problem.pipe, problem.reactor,
                                grid, basis, reduced_degree=2,
                                reduce_which="component3")
    with pytest.raises(ValueError):
        galerkin_newton_reduced(state0, problem.pipe, problem.reactor,
                                grid, basis, reduced_degree=2,
                                reduce_which="component1",
                                intermediates="couplings")


def test_iteration_cap_raises_with_trace(heat_galerkin):
    problem, basis, grid, state0, _, _ = heat_galerkin
    with pytest.raises(NonconvergenceError) as info:
        galerkin_newton(state0, problem.pipe, problem.reactor, grid, basis,
                        max_iter=1)
    assert info.value.trace is not None
    assert info.value.trace.iterations == 1


def test_state_constant_builder():
    state = GalerkinState.constant(6, 1.5, -2.0)
    assert state.vhat1.shape == (6, 1)
    assert state.vhat1[0, 0] == 1.5
    assert np.all(state.vhat1[1:] == 0.0)
    assert state.vhat2[0, 0] == -2.0
    clone = state.copy()
    clone.vhat1[0, 0] = 9.9
    assert state.vhat1[0, 0] == 1.5
