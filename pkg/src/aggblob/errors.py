"""Exception hierarchy.

Two branches matter to the CLI: configuration/usage problems (exit code 2)
and numerical failures at runtime (exit code 3).
"""


class AggblobError(Exception):
    """Base class for all package errors."""


class ValidationError(AggblobError):
    """Invalid configuration, arguments, or invariant violation."""


class DimensionMismatchError(ValidationError):
    pass


class EmptySupportError(ValidationError):
    """Discretization produced no grid point with positive density."""


class VariantMismatchError(ValidationError):
    """Operation not defined for the requested method variant."""


class UnsupportedTermError(ValidationError):
    """Kernel term outside the operation's domain (e.g. Laplacian of a Newtonian term)."""


class IndexMismatchError(ValidationError):
    """Exact and approximate data indexed by different grid labels."""


class UnknownPresetError(ValidationError):
    pass


class NumericalError(AggblobError):
    """Runtime numerical failure."""


class SingularOriginError(NumericalError):
    """Kernel evaluated at the origin where it is undefined."""


class CoincidentParticlesError(NumericalError):
    """Two distinct particles coincide under a kernel singular at 0."""


class QuadratureError(NumericalError):
    """Adaptive quadrature failed to reach the requested tolerance."""


class SolverConvergenceError(NumericalError):
    """Iterative linear solver did not converge."""


class StepSizeUnderflowError(NumericalError):
    """Adaptive time stepper underflowed; carries the time reached."""

    def __init__(self, message: str, t_reached: float):
        super().__init__(message)
        self.t_reached = t_reached


class NaNDetectedError(NumericalError):
    pass


class PastBlowupError(NumericalError):
    """Exact solution requested at or beyond its blowup time."""


class NoRootError(NumericalError):
    """Bracketing root search found no sign change."""


class OutOfTableRangeError(NumericalError):
    """Radial table queried beyond its range with fallback disabled."""
