"""Exception hierarchy shared by all modules."""


class FBAError(Exception):
    """Base class for every error raised by this package."""


class ConfigurationError(FBAError, ValueError):
    pass


class DimensionError(FBAError, ValueError):
    pass


class SingularityError(FBAError, ZeroDivisionError):
    """Evaluation hit a pole (R-matrix, Bethe equations, ...)."""


class IdentityViolation(FBAError):
    """An operator identity failed beyond tolerance.

    ``deviation`` carries the measured max-norm residual.
    """

    def __init__(self, message, deviation=float("nan")):
        super().__init__(f"{message} (max deviation {deviation:.3e})")
        self.deviation = deviation


class GaugeError(FBAError):
    """The gauge choice makes the separation of variables inapplicable."""


class DegeneracyError(FBAError):
    pass


class DecompositionError(FBAError):
    pass


class InterpolationError(FBAError):
    pass


class DegeneracyWarning(UserWarning):
    pass


class DefectiveSpectrumWarning(UserWarning):
    pass
