"""Exception types shared across the solver suite."""


class CFLViolation(RuntimeError):
    """Time step too large for the explicit scheme's stability bounds."""


class NonFiniteValue(RuntimeError):
    """A solver produced NaN or infinite values (overflow guard)."""


class NoLaggedOptimum(ValueError):
    """The lagged-optimum level set is never attained by the landscape."""


class AssumptionViolated(ValueError):
    """A structural assumption (root counts, sign constraints, floors) fails."""


class RootNotBracketed(RuntimeError):
    """Scan bracketing for a scalar root failed."""


class GridMismatch(ValueError):
    """Two discretizations cannot be compared on a common window."""


class IterationDiverged(RuntimeError):
    """Eigenvalue iteration failed to converge within the iteration budget."""


class NotPositive(RuntimeError):
    """Converged principal eigenvector has negative entries (discretization bug)."""


class ZeroVector(ValueError):
    """An operation received an identically zero vector or field."""


class ConfigError(ValueError):
    """Invalid experiment configuration; carries the offending field path."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")
