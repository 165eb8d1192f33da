"""Domain walls of two-component condensates near weak segregation.

The wall is the heteroclinic connection of the coupled stationary
Gross-Pitaevskii system from (u, v) = (0, 1) to (1, 0).  This package
computes it by finite-difference Newton, computes its eps = 0 skeleton,
and measures how the two approach each other.
"""

__version__ = "0.1.0"

from .bvp import SolverConfig, newton_solve, recenter, solve_heteroclinic
from .errors import (
    AngleOutOfRange,
    BecWallError,
    DegenerateRadius,
    EpsilonZero,
    MalformedFile,
    MeshTooCoarse,
    MultipleCrossings,
    NoConvergence,
    SchemaMismatch,
    SingularJacobian,
)
from .io import read_profile, read_reduced, write_profile, write_reduced
from .model import (
    CartesianProfile,
    CartesianState,
    Frame,
    Mesh,
    ModelParams,
    SlowFastProfile,
    SlowFastState,
    analytic_spectrum,
    cartesian_to_slowfast,
    hamiltonian_residual,
    linearize_slowfast,
    slowfast_rhs,
    slowfast_to_cartesian,
)
from .singular import (
    ReducedSolution,
    composite_guess,
    critical_manifold_point,
    reduced_energy_integral,
    reduced_energy_quadrature,
    singular_lift,
    solve_reduced,
)
from .validation import RateStudy, ValidationReport, rate_study, validate_profile, weighted_deviation

__all__ = [name for name in dir() if not name.startswith("_")]
