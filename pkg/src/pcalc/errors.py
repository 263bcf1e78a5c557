"""Exception hierarchy for pcalc.

Every error raised on purpose by this package derives from PcalcError so
callers (and the CLI) can distinguish our failures from genuine bugs.
"""

from __future__ import annotations


class PcalcError(Exception):
    """Base class for all pcalc errors."""


class UsageError(PcalcError):
    """Bad invocation: unknown flags, out-of-range options, malformed input."""


class ParseError(UsageError):
    """Syntax error in an expression source string.

    Carries the byte offset of the offending token in the UTF-8 encoding
    of the source.
    """

    def __init__(self, message: str, offset: int) -> None:
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class ParameterError(UsageError, ValueError):
    """Invalid mathematical parameters (family kind, alpha/beta ranges, ...)."""


class EvaluationError(PcalcError):
    """Runtime evaluation failure: unbound variable or domain error."""


class DomainError(EvaluationError):
    """A point lies outside the valid domain of a family or function."""


class DifferentiationError(PcalcError):
    """Symbolic differentiation hit a non-differentiable node (abs, gamma).

    Callers are expected to fall back to the limit-definition path.
    """


class QuadratureError(PcalcError):
    """Adaptive integration could not reach the requested tolerance."""


class NonIntegrableError(QuadratureError):
    """The integrand has a non-integrable singularity on the interval."""


class RootSearchError(PcalcError):
    """No sign change and no near-zero residual found on the scan grid."""

    def __init__(self, message: str, grid: tuple[float, ...] = (),
                 residuals: tuple[float, ...] = ()) -> None:
        super().__init__(message)
        self.grid = grid
        self.residuals = residuals


class InfeasibleCertificateError(PcalcError):
    """Contraction certificate infeasible and no override was requested."""


class DivergenceError(PcalcError):
    """A fixed-point iteration diverged."""


class BoundViolationError(PcalcError):
    """A claimed rigorous lower bound was violated by the computed value."""

    def __init__(self, message: str, step: object = None) -> None:
        super().__init__(message)
        self.step = step
