"""Exception types shared across modules."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ContractError(ValueError):
    """Inputs are individually valid but inconsistent with each other."""


class CapabilityError(ValueError):
    """The request is valid but beyond what the implementation supports."""


class ConvergenceError(RuntimeError):
    """An iterative method did not converge."""
