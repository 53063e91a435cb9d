"""Exception hierarchy shared by all causalab modules."""


class CausalabError(Exception):
    """Base class for every error raised by this package."""


class NonConvergence(CausalabError, RuntimeError):
    """An iterative or adaptive procedure exhausted its budget."""


class MissedRoot(CausalabError, RuntimeError):
    """Root or eigenvalue count disagrees with the expected count."""


class DimensionMismatch(CausalabError, ValueError):
    pass


class GridTooCoarse(CausalabError, ValueError):
    pass


class GridMismatch(CausalabError, ValueError):
    pass


class OutOfDomain(CausalabError, ValueError):
    pass


class BoundaryViolation(CausalabError, ValueError):
    """A wave function does not satisfy the boundary condition it claims."""


class SupportTooWide(CausalabError, ValueError):
    """State too close to the edge of the periodic embedding box."""


class TruncatedBasis(CausalabError, ValueError):
    """A spectral decomposition misses too much of the state's norm."""


class EmptyRegion(CausalabError, ValueError):
    pass


class RangeExcursion(CausalabError, ArithmeticError):
    """A probability left [0, 1] by more than the allowed round-off."""


class ResolutionInsufficient(CausalabError, RuntimeError):
    """A quantity asserted to be positive is indistinguishable from grid noise."""


class UnsafeState(CausalabError, ValueError):
    """Occupation support of a state reaches the Fock cutoff."""


class AmplitudeTooLarge(CausalabError, ValueError):
    pass


class SpanViolation(CausalabError, ValueError):
    """A test function is not represented by the chosen mode basis."""


class MissingColumn(CausalabError, KeyError):
    pass


class ConfigError(CausalabError, ValueError):
    """Invalid run configuration."""
