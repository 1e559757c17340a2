"""Initial-temperature recovery for the one-phase Stefan problem."""

__version__ = "0.1.0"

from .assembly import DenseSystem, QuadratureRule, assemble, collocation_residual
from .direct_solver import DirectSolution, direct_stability_gap, solve_direct
from .errors import (
    FrontCollapseError,
    KernelDomainError,
    NotPositiveDefiniteError,
    NumericalError,
    StefanError,
    ValidationError,
)
from .experiments import relative_error, run_inversion, run_table, stability_sweep
from .kernel import KernelArgs, heat_kernel, neumann
from .problems import (
    BoundaryTrajectory,
    InitialCondition,
    ProblemConfig,
    add_noise,
    differentiate_boundary,
    example1,
    example2,
)
from .regularize import RegularizationConfig, Reconstruction, landweber_iterate, tikhonov_iterate
