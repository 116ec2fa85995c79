"""Exception hierarchy.

Every error raised on purpose by the library derives from ``StereolocError``.
The CLI maps ``ValidationError`` to exit code 1 and every other subclass to
exit code 2.
"""


class StereolocError(Exception):
    """Base class for library errors."""


class ValidationError(StereolocError, ValueError):
    """Invalid input or configuration (bad shapes, out-of-range values)."""


class DimensionMismatchError(ValidationError):
    pass


class DomainError(ValidationError):
    """A parameter or stamp lies outside the admissible range."""


class ConfigError(ValidationError):
    """Scenario configuration rejected; ``path`` names the offending field."""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path


class NumericalError(StereolocError, ArithmeticError):
    """Base class for failures of a numerical procedure."""


class NoSignalError(NumericalError):
    """The null-condition function does not change sign on the bracket."""


class NotTimelikeError(NumericalError):
    pass


class ConvergenceError(NumericalError):
    pass


class SingularConfigurationError(NumericalError):
    """A linear system or Jacobian is singular (degenerate geometry)."""


class AmbiguousSolutionError(NumericalError):
    """Two admissible solutions exist and nothing selects one of them."""


class DegenerateFrameError(NumericalError):
    """Reference points of a projective frame are not in general position."""


class NotNullSeparatedError(NumericalError):
    pass


class ZeroSpatialPartError(NumericalError):
    pass


class VanishingDenominatorError(NumericalError):
    """A fractional-linear map was evaluated on its exceptional set."""


class EchoAssemblyError(NumericalError):
    """A nested null solve failed while assembling echo data.

    ``edge`` is a ``(receiver, source)`` pair naming the failing signal.
    """

    def __init__(self, edge, cause):
        super().__init__(f"signal {edge[1]} -> {edge[0]} failed: {cause}")
        self.edge = edge
        self.cause = cause
