"""Learning trajectory skills from successful and failed demonstrations.

Demonstrations labeled success or failure are fitted with joint
time-space Gaussian mixtures; reproduction minimizes a scalarized cost
that attracts toward the successful evidence, repels from the failed
evidence, and honors elastic smoothness plus point constraints,
optionally across differential coordinate frames. Failed reproductions
can be fed back to sharpen the next attempt.
"""

from ._kernels import backend_name, using_native
from .costs import (
    ConstraintSet,
    CostBreakdown,
    GaussianRepulsion,
    SuccessField,
    combined_quad,
    dissimilarity_weights,
    elastic_energy,
    penalty,
    quad_cost,
    success_field_cost,
)
from .errors import (
    ConstraintError,
    DegenerateFitError,
    FitError,
    InsufficientDataError,
    SkillReproError,
    SolveError,
    TrajectoryError,
)
from .fixtures import Obstacle, Scenario, build as build_scenario, collision_labeler
from .metrics import MetricReport, crv, curvature_profile, evaluate, sea, sse
from .mixture import (
    FitConfig,
    MixtureModel,
    RegressedPath,
    fit_em,
    gmr,
    select_k_bic,
)
from .solver import (
    FrameModel,
    MultiCoordWeights,
    QuadraticProblem,
    RefinementResult,
    Reproduction,
    SolveStatus,
    SolverConfig,
    SolverReport,
    assemble,
    refine,
    reproduce,
    solve,
)
from .trajectory import (
    CoordinateFrame,
    Demonstration,
    DemonstrationSet,
    Label,
    Trajectory,
    align_set,
    resample,
    smooth,
    to_frame,
)

__version__ = "0.1.0"

__all__ = [
    "CoordinateFrame",
    "ConstraintError",
    "ConstraintSet",
    "CostBreakdown",
    "DegenerateFitError",
    "Demonstration",
    "DemonstrationSet",
    "FitConfig",
    "FitError",
    "FrameModel",
    "GaussianRepulsion",
    "InsufficientDataError",
    "Label",
    "MetricReport",
    "MixtureModel",
    "MultiCoordWeights",
    "Obstacle",
    "QuadraticProblem",
    "RefinementResult",
    "RegressedPath",
    "Reproduction",
    "Scenario",
    "SkillReproError",
    "SolveError",
    "SolveStatus",
    "SolverConfig",
    "SolverReport",
    "SuccessField",
    "Trajectory",
    "TrajectoryError",
    "align_set",
    "assemble",
    "backend_name",
    "build_scenario",
    "collision_labeler",
    "combined_quad",
    "crv",
    "curvature_profile",
    "dissimilarity_weights",
    "elastic_energy",
    "evaluate",
    "fit_em",
    "gmr",
    "penalty",
    "quad_cost",
    "refine",
    "reproduce",
    "resample",
    "sea",
    "select_k_bic",
    "smooth",
    "solve",
    "sse",
    "success_field_cost",
    "to_frame",
    "using_native",
]
