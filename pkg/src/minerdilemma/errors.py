"""Exception types raised across the package."""


class MinerDilemmaError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(MinerDilemmaError, ValueError):
    """Inputs lie outside the domain where the reward model is defined."""


class PreconditionError(MinerDilemmaError, ValueError):
    """An operation was called on an instance it does not apply to."""


class NumericalError(MinerDilemmaError, ArithmeticError):
    """A root finder or linear solve could not produce a trustworthy value."""


class InternalError(MinerDilemmaError, AssertionError):
    """A computed result violates an invariant that should always hold."""


class OptimizationError(MinerDilemmaError, RuntimeError):
    """The best-response maximizer failed to improve on its starting point."""
