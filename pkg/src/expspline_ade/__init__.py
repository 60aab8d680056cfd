"""Exponential B-spline Galerkin method for u_t + xi u_x - lam u_xx = 0."""

from .assembly import ElementMatrices, assemble_global, gauss_legendre, reference_element_matrices
from .basis import BasisConstants, Mesh, derive_constants, eval_basis
from .linalg import BandedMatrix, SingularMatrixError, banded_lu_factor, banded_lu_solve, thomas_solve
from .problems import (
    GaussianPulseParams,
    PureAdvectionParams,
    courant_number,
    exact_gaussian_pulse,
    exact_pure_advection,
    linf_error,
    peak_concentration,
)
from .solver import (
    CoefficientVector,
    ProblemSpec,
    SolutionHistory,
    apply_dirichlet,
    build_crank_nicolson,
    evaluate,
    fit_initial,
    knot_values,
    run,
    step,
)

__version__ = "0.1.0"

__all__ = [
    "BandedMatrix",
    "BasisConstants",
    "CoefficientVector",
    "ElementMatrices",
    "GaussianPulseParams",
    "Mesh",
    "ProblemSpec",
    "PureAdvectionParams",
    "SingularMatrixError",
    "SolutionHistory",
    "apply_dirichlet",
    "assemble_global",
    "banded_lu_factor",
    "banded_lu_solve",
    "build_crank_nicolson",
    "courant_number",
    "derive_constants",
    "eval_basis",
    "evaluate",
    "exact_gaussian_pulse",
    "exact_pure_advection",
    "fit_initial",
    "gauss_legendre",
    "knot_values",
    "linf_error",
    "peak_concentration",
    "reference_element_matrices",
    "run",
    "step",
    "thomas_solve",
]
