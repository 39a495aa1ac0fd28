class CapacityError(ValueError):
    """A request needs more primes than the configured sieve limit allows."""

    def __init__(self, message, required=None):
        super().__init__(message)
        self.required = required


class DomainError(ValueError):
    """Argument outside the region where the quantity is defined."""


class NumericError(ArithmeticError):
    """Quadrature or series failed to reach its tolerance."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
