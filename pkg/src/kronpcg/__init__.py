"""Tensor-structured preconditioned conjugate gradients for grid Poisson problems.

The package solves finite-difference Poisson equations on 2D/3D
rectangular grids without ever assembling the system matrix: the operator
lives as one small 1D matrix per direction, applied through tensor mode
products.  Five boundary treatments per direction, three structure-aware
preconditioner families, hardware-independent operation accounting, and a
CLI for generating benchmark problems and reproducing the packaged
experiments.
"""

from .counting import OpCounter, cost_model
from .laplace1d import (
    BoundaryCondition,
    Laplacian1D,
    SpectralDecomposition,
    analytic_spectrum,
    build,
    is_singular_1d,
    numeric_spectrum,
)
from .operators import (
    BoundaryData,
    FaceValue,
    PoissonOperator,
    apply,
    apply_bc_updates,
    assemble_dense,
    center,
    is_singular,
    nullspace_component,
    poisson_operator,
    spectrum_sums,
)
from .precond import (
    IdentityPreconditioner,
    IndefinitePreconditionerWarning,
    JacobiPreconditioner,
    LowRankPreconditioner,
    PinvPreconditioner,
    jacobi_standalone,
    make_preconditioner,
)
from .problems import (
    P3_VARIANTS,
    ProblemSpec,
    gen_problem1,
    gen_problem2,
    gen_problem3,
    normalize,
    run_experiment,
)
from .solver import (
    ConvergenceLog,
    IterationRecord,
    PCGBreakdown,
    SolverConfig,
    eta_series,
    kappa_indicator,
    pcg,
    true_residual,
)
from .tensors import (
    frobenius_norm,
    hadamard,
    hadamard_pinv,
    inner,
    kron_assemble,
    linear_transform,
    mode_product,
    saxpy,
    unvec,
    vec,
)

__version__ = "0.1.0"
