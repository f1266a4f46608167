class RegisterCapError(MemoryError):
    """Requested register is larger than the dense engine allows."""


class KrausError(ValueError):
    """Kraus set does not satisfy the completeness relation."""


class InvalidFilterError(ValueError):
    """Filter operator is not a valid measurement element (norm > 1)."""


class NotDistillableError(ValueError):
    """Recurrence cannot reach the target fidelity from this input.

    ``threshold`` is the minimal weak-measurement strength that would make
    the input distillable.
    """

    def __init__(self, message, threshold=None):
        super().__init__(message)
        self.threshold = threshold


class QuadratureError(ArithmeticError):
    """Adaptive quadrature failed to reach the requested tolerance."""


class ConfigError(ValueError):
    """Invalid sweep or validation configuration."""
