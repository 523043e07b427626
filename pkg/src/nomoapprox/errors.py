"""Exception types shared across the package.

A small hierarchy rooted at :class:`NomoError` so callers (notably the
CLI) can distinguish domain failures from programming errors, which keep
raising the built-in ``ValueError``/``IndexError``.
"""


class NomoError(Exception):
    """Base class for all domain-level failures."""


class RangeViolationError(NomoError):
    """The input polynomial leaves [0, 1] somewhere on the unit cube."""


class DegenerateFunctionError(NomoError):
    """The function is (numerically) constant, so the quantity is undefined."""


class SubsetBudgetError(NomoError):
    """A full decomposition was requested for too many variables."""


class InfeasibleError(NomoError):
    """No monotone skew candidate could be recovered from the relaxation."""
