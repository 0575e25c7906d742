"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class NotAUnit(DomainError):
    """The element has no multiplicative inverse modulo m."""


class NoSuccessor(DomainError):
    """1/1 is the last element of every Farey sequence."""


class NoneFound(LookupError):
    """A bounded search came up empty."""


class BudgetExceeded(RuntimeError):
    """An exact computation would exceed its work budget; use Monte Carlo instead."""
