"""Exception types shared across the package.

The CLI maps these onto process exit codes, so library code should raise
the most specific class that applies.
"""


class MemoMarketError(Exception):
    """Base class for all package errors."""


class ConfigError(MemoMarketError):
    """Malformed or inconsistent run configuration (CLI exit code 2)."""


class DomainError(MemoMarketError, ValueError):
    """Arguments outside the kernel/lattice domain or violated invariants."""


class PreconditionError(MemoMarketError):
    """A stated precondition of an operation does not hold (exit code 3).

    Typical case: asking for the sufficient no-arbitrage period count when
    T >= 1/C, where the sufficient condition is simply unavailable.
    """


class NumericalRegimeError(MemoMarketError):
    """The request left the numerical validity region (exit code 4)."""

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message)
        self.step = step


class QuadratureBudgetError(MemoMarketError):
    """Adaptive quadrature did not converge within its subdivision budget."""


class NoViolationError(MemoMarketError):
    """A strategy witness was requested at a step with no violation."""


class AllZeroDecayError(MemoMarketError):
    """Every probability in a decay fit is zero: identically zero on the
    tested range, no slope can be estimated."""
