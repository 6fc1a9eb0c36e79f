"""Exception hierarchy shared by all modules."""


class LabError(RuntimeError):
    """Base class; carries an optional machine-readable record."""

    def __init__(self, message, **record):
        super().__init__(message)
        self.record = dict(record, message=message, kind=type(self).__name__)


class ConvergenceError(LabError):
    """An iteration or estimator did not meet its tolerance."""


class SingularCoefficientError(LabError):
    """A leading ODE coefficient vanishes on the integration path."""


class SCViolation(LabError):
    """The nonvanishing-integral check failed."""


class ResolutionError(LabError):
    """A grid or quadrature does not resolve the requested scale."""
