"""Exception hierarchy shared by every module of the package."""


class MTWError(Exception):
    """Base class for all errors raised by spheremtw."""


class DomainError(MTWError, ValueError):
    """A distance or chart point lies outside the admissible domain."""


class DegenerateCost(MTWError, ValueError):
    """f' or f'' vanishes where the reduction needs it to be nonzero."""


class AntipodalError(DomainError):
    """Two chart points (or a stencil around them) reach the cut locus."""


class DimensionError(MTWError, ValueError):
    """The requested orientation case cannot be realised in this dimension."""


class OrthogonalityError(MTWError, ValueError):
    """xi and eta are not an orthonormal pair."""


class DivergentLimit(MTWError, ArithmeticError):
    """Successive endpoint samples grow without bound."""

    def __init__(self, message: str, samples: tuple = ()):
        super().__init__(message)
        self.samples = tuple(samples)

    @property
    def direction(self) -> int:
        """+1 or -1 for growth towards +inf or -inf, 0 if unknown."""
        if not self.samples:
            return 0
        last = self.samples[-1]
        return 0 if last != last else (1 if last > 0 else -1)


class StencilDomainError(DomainError):
    """A finite-difference stencil point left the valid domain."""


class SingularMixedHessian(MTWError, ArithmeticError):
    """The mixed Hessian c_{i,j} could not be inverted."""


class NoSignChange(MTWError, ValueError):
    """A root bracket does not straddle a sign change."""


class EmptyDomain(DomainError):
    """The scan interval is empty."""
