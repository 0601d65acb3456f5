"""Exception hierarchy shared by all modules."""


class SosError(Exception):
    """Base class for every error raised by this package."""


class InvalidInput(SosError, ValueError):
    """Malformed arguments: wrong sizes, dimensions or degrees."""


class NotUnisolvent(SosError):
    """The node set does not determine polynomials of the requested degree."""


class WeightDegreeMismatch(SosError):
    """Block sizes do not add up to the number of interpolation nodes."""


class OutOfDomain(SosError):
    """The multiplier lies outside the positive-definiteness domain of M."""


class SolveError(SosError):
    """Repeated failure to factor the iteration matrix."""


class UnknownPreset(SosError, KeyError):
    """No preset with that name."""


class InsufficientMargin(SosError):
    """Finite-difference stencil leaves the domain even after shrinking h."""
