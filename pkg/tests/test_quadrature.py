"""Tests for the probability-normalized Gauss-Legendre rules."""

import numpy as np
import pytest
from numpy.polynomial import legendre as npleg
from numpy.testing import assert_allclose

from netuq.quadrature import ResourceLimitError, gauss_legendre, tensor_gauss


def test_two_point_rule_is_explicit():
    nodes, weights = gauss_legendre(2)
    assert_allclose(nodes, [-1.0 / np.sqrt(3.0), 1.0 / np.sqrt(3.0)], rtol=1e-15)
    assert_allclose(weights, [0.5, 0.5], rtol=1e-15)


@pytest.mark.parametrize("n", [1, 2, 3, 5, 8, 20])
def test_rule_matches_reference_implementation(n):
    """Nodes agree with numpy's leggauss; weights carry the 1/2 density."""
    nodes, weights = gauss_legendre(n)
    ref_nodes, ref_weights = npleg.leggauss(n)
    assert_allclose(nodes, ref_nodes, atol=1e-14)
    assert_allclose(weights, ref_weights / 2.0, atol=1e-15)


@pytest.mark.parametrize("n", [3, 6, 11])
def test_rule_symmetry(n):
    nodes, weights = gauss_legendre(n)
    assert_allclose(nodes, -nodes[::-1], atol=1e-15)
    assert_allclose(weights, weights[::-1], atol=1e-15)
    assert_allclose(weights.sum(), 1.0, rtol=1e-15)


def test_rule_exact_for_high_even_monomial():
    """n points integrate x^(2n-2) exactly against the uniform density."""
    nodes, weights = gauss_legendre(5)
    assert_allclose(weights @ nodes ** 8, 1.0 / 9.0, rtol=1e-14)
    assert_allclose(weights @ nodes ** 7, 0.0, atol=1e-15)


def test_tensor_grid_shapes_and_weights():
    grid = tensor_gauss(3, 4)
    assert grid.dim == 3
    assert grid.npoints == 4 ** 3
    assert grid.points.shape == (64, 3)
    assert grid.weights.shape == (64,)
    assert_allclose(grid.weights.sum(), 1.0, rtol=1e-13)


def test_tensor_grid_last_axis_varies_fastest():
    grid = tensor_gauss(2, 2)
    nodes, _ = gauss_legendre(2)
    expected = np.array([
        [nodes[0], nodes[0]], [nodes[0], nodes[1]],
        [nodes[1], nodes[0]], [nodes[1], nodes[1]],
    ])
    assert_allclose(grid.points, expected, atol=1e-15)


def test_tensor_grid_integrates_separable_polynomial():
    grid = tensor_gauss(2, 3)
    vals = grid.points[:, 0] ** 2 * grid.points[:, 1] ** 4
    assert_allclose(grid.weights @ vals, (1.0 / 3.0) * (1.0 / 5.0), rtol=1e-14)


def test_tensor_grid_point_budget_enforced():
    with pytest.raises(ResourceLimitError):
        tensor_gauss(8, 8)


def test_bad_arguments_rejected():
    with pytest.raises(ValueError):
        gauss_legendre(0)
    with pytest.raises(ValueError):
        tensor_gauss(0, 3)
    with pytest.raises(ValueError):
        tensor_gauss(2, 0)
