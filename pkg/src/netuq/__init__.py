"""Uncertainty propagation for network-coupled two-component systems.

Coupling variables between components are expanded in orthonormal
polynomial chaos; coefficients are found either by nonlinear elimination
per quadrature point or by an intrusive stochastic Galerkin Newton
iteration.  A reduced-basis construction over intermediate variables
yields a modified quadrature rule with mostly zero weights, cutting the
number of expensive component solves.
"""

from .chaos import (TensorBasis, evaluate_basis, expected_size,
                    legendre_orthonormal, total_degree_indices)
from .galerkin import (GalerkinState, GalerkinTrace, TripleProductTensor,
                       galerkin_newton, galerkin_newton_reduced,
                       galerkin_residual, triple_products)
from .lp import (InfeasibleProgramError, IterationLimitError, LPSolution,
                 StandardFormLP, phase_one_bfs)
from .models import (CompositeFunctionProblem, CompositeRow,
                     HeatNetworkProblem, HeatNetworkResult,
                     MonteCarloResult, PipeComponent, ReactorComponent,
                     composite_experiment, composite_reference,
                     composite_sweep, heat_network_experiment,
                     monte_carlo_coupling)
from .network import (AugmentedSolution, ComponentModel, CouplingState,
                      NonconvergenceError, SolveTrace, augmented_newton,
                      eliminate_solve, gauss_seidel_relax, split_inputs)
from .pseudospectral import (SpectralCoefficients, evaluate_expansion,
                             moments, project)
from .quadrature import (QuadratureGrid, ResourceLimitError, gauss_legendre,
                         tensor_gauss)
from .reduction import (ModifiedQuadrature, MonomialMatrix,
                        RankDeficiencyError, ReducedBasis,
                        ReductionFailureError, constraint_matrix,
                        constraint_pairs, fixed_rank_for, monomial_matrix,
                        reduced_project, reduced_weights,
                        standardize_columns, weighted_mgs)

__version__ = "0.1.0"

__all__ = [
    "TensorBasis", "evaluate_basis", "expected_size",
    "legendre_orthonormal", "total_degree_indices",
    "GalerkinState", "GalerkinTrace", "TripleProductTensor",
    "galerkin_newton", "galerkin_newton_reduced", "galerkin_residual",
    "triple_products",
    "InfeasibleProgramError", "IterationLimitError", "LPSolution",
    "StandardFormLP", "phase_one_bfs",
    "CompositeFunctionProblem", "CompositeRow", "HeatNetworkProblem",
    "HeatNetworkResult", "MonteCarloResult", "PipeComponent",
    "ReactorComponent", "composite_experiment", "composite_reference",
    "composite_sweep", "heat_network_experiment", "monte_carlo_coupling",
    "AugmentedSolution", "ComponentModel", "CouplingState",
    "NonconvergenceError", "SolveTrace", "augmented_newton",
    "eliminate_solve", "gauss_seidel_relax", "split_inputs",
    "SpectralCoefficients", "evaluate_expansion", "moments", "project",
    "QuadratureGrid", "ResourceLimitError", "gauss_legendre",
    "tensor_gauss",
    "ModifiedQuadrature", "MonomialMatrix", "RankDeficiencyError",
    "ReducedBasis", "ReductionFailureError", "constraint_matrix",
    "constraint_pairs", "fixed_rank_for", "monomial_matrix",
    "reduced_project", "reduced_weights", "standardize_columns",
    "weighted_mgs",
    "__version__",
]
