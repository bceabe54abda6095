"""Exception taxonomy shared by all edgedpp modules.

Value-level problems (bad numbers, out-of-range parameters) raise
DomainError; calling an operation outside its contract (wrong kernel
branch, empty input) raises UsageError.  Numerical failures of the
quadrature and saddle machinery get their own types so callers can
distinguish "you asked for something impossible" from "the method did
not converge".
"""


class EdgeDppError(Exception):
    """Base class for all edgedpp errors."""


class DomainError(EdgeDppError, ValueError):
    """Input value outside the mathematical domain (non-finite, bad range)."""


class UsageError(EdgeDppError, ValueError):
    """Operation invoked outside its contract (wrong branch, empty input)."""


class QuadratureError(EdgeDppError, RuntimeError):
    """Adaptive quadrature failed to converge within its doubling budget."""


class ContourError(EdgeDppError, RuntimeError):
    """No admissible integration circle (pole too close, branch region hit)."""


class DegenerateSaddleError(EdgeDppError, RuntimeError):
    """Saddle points collide at a focal point; quadratic theory does not apply."""


class DegenerateCoordinatesError(EdgeDppError, RuntimeError):
    """Elliptic coordinates requested at a focus where they are singular."""


class ConsistencyError(EdgeDppError, RuntimeError):
    """Two independent evaluation routes disagree beyond the internal bound."""


class DegenerateFitError(EdgeDppError, RuntimeError):
    """Rate fit impossible because some errors are exactly zero (exact agreement)."""
