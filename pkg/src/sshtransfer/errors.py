"""Exception types shared across the package."""


class ContractError(ValueError):
    """An argument violates a documented precondition."""


class ConvergenceError(ArithmeticError):
    """The tridiagonal eigensolver hit its iteration cap."""


class IntegrationError(ArithmeticError):
    """Time integration drifted beyond the allowed norm tolerance."""
