"""Exception types shared across the package."""


class LoopmassError(Exception):
    """Base class for all package-specific errors."""


class DomainError(LoopmassError, ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class DegeneratePairError(DomainError):
    """The two evaluation points coincide (the mass diverges)."""


class PoleError(DomainError):
    """Evaluation requested at a pole of the function."""


class DivergenceError(DomainError):
    """The requested series/integral diverges for these parameters."""


class UnsupportedParametersError(DomainError):
    """Parameter combination outside the implemented evaluation paths
    (e.g. logarithmic connection cases of the Gauss hypergeometric)."""


class NonConvergenceError(LoopmassError, RuntimeError):
    """An iterative evaluation failed to reach the requested tolerance."""


class IndeterminatePointError(LoopmassError, RuntimeError):
    """A query point falls inside a blocked cell of the disconnection grid,
    so enclosure cannot be decided at this resolution."""
