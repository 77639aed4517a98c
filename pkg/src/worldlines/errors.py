"""Exception hierarchy shared by all modules."""


class WorldlineError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(WorldlineError):
    """Argument outside the mathematical domain of a special function."""


class PoleOnPath(WorldlineError):
    """A real characteristic puts a pole of the integrand inside the path."""


class ChartSingular(WorldlineError):
    """Null ray lies at conformal infinity of the Minkowski chart."""


class NotTimelike(WorldlineError):
    """Curve velocity fails to be time-like at some sample."""


class DegenerateOsculating(WorldlineError):
    """Second osculating space collapses: lift derivatives are dependent."""


class VertexOnSegment(WorldlineError):
    """Conformal vertex inside a segment that must be vertex-free."""


class InvalidPhaseParams(WorldlineError):
    """Phase parameters violate the ordering e1 < 0 < e2 < e3."""


class StepSizeUnderflow(WorldlineError):
    """Adaptive integrator step collapsed below the representable range."""


class ConstraintViolated(WorldlineError):
    """Constant-curvature constraint k1 = (k2^2 + k3^2)/2 not satisfied."""


class DegenerateSpectrum(WorldlineError):
    """Near-double root that passes neither the simple nor the double branch."""


class SingularPoint(WorldlineError):
    """Evaluation requested too close to a singular point of the map."""


class AlphaOutOfRange(WorldlineError):
    """Zero-locator argument 1/alpha fell outside [0, 1]."""


class DegenerateVectors(WorldlineError):
    """Principal vectors vanish or fail to be independent."""


class SingularMatrix(WorldlineError):
    """Principal-vector matrix is not invertible within the condition bound."""
