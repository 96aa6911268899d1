"""Exception types shared across the package."""


class SkillReproError(Exception):
    """Base class for errors raised by this package."""


class TrajectoryError(SkillReproError, ValueError):
    """Invalid trajectory data or an operation precondition violation."""


class ConstraintError(SkillReproError, ValueError):
    """Invalid constraint set (bad index, ragged target, nonpositive rho)."""


class FitError(SkillReproError, RuntimeError):
    """Mixture estimation failed."""


class InsufficientDataError(FitError):
    """Not enough samples for the requested component count."""


class DegenerateFitError(FitError):
    """A mixture component collapsed despite covariance regularization."""


class SolveError(SkillReproError, RuntimeError):
    """The optimizer produced non-finite values or was misconfigured."""
