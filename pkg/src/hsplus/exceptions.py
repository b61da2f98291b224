"""Exception types shared across the package."""


class HsPlusError(Exception):
    """Base class for errors raised by hsplus."""


class DomainError(HsPlusError, ValueError):
    """An argument lies outside the domain of the function."""


class PoleAtOrigin(HsPlusError, ArithmeticError):
    """The density is unbounded at the requested point.

    Raised instead of returning ``inf`` so that an unbounded value cannot
    silently propagate through downstream arithmetic.
    """


class UnsupportedConfiguration(HsPlusError, ValueError):
    """The result is only defined for a narrower parameter set (e.g. tau = 1)."""


class ToleranceNotMet(HsPlusError, RuntimeError):
    """Adaptive quadrature exhausted its panel budget above tolerance."""


class DegenerateOracle(HsPlusError, ValueError):
    """The Bayes-oracle threshold is not positive (v <= 1)."""
