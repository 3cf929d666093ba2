"""Exception hierarchy shared by all schurlab modules."""


class SchurLabError(Exception):
    """Base class; the CLI maps these to exit status 2."""


class OrderUnsupported(SchurLabError):
    """A derivative or divided-difference order exceeds what the function provides."""


class DegenerateTolerance(SchurLabError):
    """A clustering or sampling tolerance is zero or negative."""


class CoincidentPivot(SchurLabError):
    """Node-insertion identity requested with equal pivot nodes."""


class ConvergenceFailure(SchurLabError):
    """An iterative matrix decomposition did not converge.  Exit status 3."""


class BadExponent(SchurLabError):
    """A Schatten/Lebesgue exponent outside its admissible range."""


class DimensionMismatch(SchurLabError):
    """Matrix shapes incompatible with each other or with a point set."""


class OriginQuery(SchurLabError):
    """A homogeneous symbol was evaluated at the origin."""


class PoleHit(SchurLabError):
    """A rational symbol was evaluated on its polar set."""


class DiagonalQuery(SchurLabError):
    """A three-variable symbol was evaluated on the full diagonal."""


class DiagonalMargin(SchurLabError):
    """A two-variable sampling grid does not keep a positive distance to the diagonal."""


class IndexConstraint(SchurLabError):
    """A geometric-discretization index triple violates its variant's constraints."""


class OutOfWindow(SchurLabError):
    """A point lies outside the dyadic spatial window."""


class ScaleMismatch(SchurLabError):
    """A dyadic object was queried below the resolution it is defined at."""


class CoefficientBound(SchurLabError):
    """A dyadic-shift coefficient violates its size constraint."""


class CarlesonViolation(SchurLabError):
    """A paraproduct coefficient sequence fails the Carleson normalization."""


class SupportViolation(SchurLabError):
    """A symbol carries mass outside the support required by the operation."""
