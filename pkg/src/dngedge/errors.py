"""Exception hierarchy shared by every module."""


class GeometryError(Exception):
    """Base class for all errors raised by the toolkit."""


class MetricError(GeometryError):
    pass


class SignatureError(MetricError):
    """Metric (ambient or induced) does not have the expected signature."""


class DegeneracyError(MetricError):
    """Metric is singular, e.g. a null worldsheet or a coordinate singularity."""


class DomainError(GeometryError):
    """Evaluation point, or a finite-difference neighbourhood, leaves a chart domain."""


class FrameError(GeometryError):
    """Not enough independent normal directions could be constructed."""


class OrientationError(GeometryError):
    """Could not decide which side of an edge the bulk lies on."""


class ConsistencyError(GeometryError):
    """A built-in identity check failed above tolerance."""

    def __init__(self, message, worst=None):
        super().__init__(message)
        self.worst = worst


class InputError(GeometryError, ValueError):
    pass


class ConvergenceError(GeometryError):
    pass


class PhysicsError(GeometryError):
    """Physics precondition failed: null edge, off-shell background, singular regime."""
