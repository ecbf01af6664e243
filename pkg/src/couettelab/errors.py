"""Exception types shared across the package.

Every error that a caller is expected to handle programmatically gets its
own class; generic misuse raises the usual ValueError/TypeError.
"""


class CouetteLabError(Exception):
    """Base class for all package-specific errors."""


class ConfigInvalid(CouetteLabError):
    """A configuration document violates the published schema."""


class NonconformalGrid(CouetteLabError):
    """Two spectral objects live on incompatible grids."""


class SingularSymbolAtZeroMode(CouetteLabError):
    """A negative fractional power of the sheared Laplacian was applied to a
    field with nonzero mean."""


class TruncationBudgetExceeded(CouetteLabError):
    """The analytic tail bound of a truncated mode sum exceeds tolerance."""


class InvalidRichardson(CouetteLabError):
    """Stratification parameter outside the stable regime (beta <= 1/2)."""


class DegenerateDirection(CouetteLabError):
    """A direction vector required to be non-degenerate has a zero component."""


class TimeMismatch(CouetteLabError):
    """A weight table and a field snapshot disagree about the current time."""


class InsufficientData(CouetteLabError):
    """Not enough samples for the requested fit."""


class NonpositiveNorm(CouetteLabError):
    """A log fit was requested on data containing nonpositive norms."""


class GridTooLarge(CouetteLabError):
    """An O(N^4) pairwise diagnostic was requested beyond the pair budget."""


class CflViolation(CouetteLabError):
    """Fixed step size violates the advective CFL estimate."""


class NonfiniteState(CouetteLabError):
    """A state coefficient became NaN or Inf during time stepping."""


class BracketFailure(CouetteLabError):
    """A bisection could not bracket the requested threshold."""
