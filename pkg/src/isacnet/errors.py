"""Exception hierarchy shared by the analytic, simulation and I/O layers."""


class IsacError(Exception):
    """Base class for all package errors."""


class DomainError(IsacError, ValueError):
    """An argument lies outside the domain where the quantity is defined."""


class DegenerateLaw(DomainError):
    """A distance law collapses to a point mass for the requested parameters."""


class ConvergenceError(IsacError, ArithmeticError):
    """Quadrature or root finding failed to reach the requested tolerance.

    Attributes
    ----------
    estimate : float
        Best estimate available when the procedure gave up.
    error : float
        Estimated absolute error of ``estimate``.
    """

    def __init__(self, message, estimate=float("nan"), error=float("inf")):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class InfeasibleAllocation(IsacError, ValueError):
    """The (K, L, J, Q) allocation violates the DoF or target-count budget."""


class DegenerateRealization(IsacError, RuntimeError):
    """A sampled network contains no base station."""


class RankDeficiency(IsacError, ArithmeticError):
    """Stacked channel matrix is numerically singular."""


class ConfigError(IsacError, ValueError):
    """Base class for configuration ingestion failures."""


class ParseError(ConfigError):
    def __init__(self, message, line=None, column=None):
        loc = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + loc)
        self.line = line
        self.column = column


class ValidationError(ConfigError):
    """A parsed value violates a :class:`NetworkConfig` invariant."""
