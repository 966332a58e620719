"""Exception types shared by the compiled and pure-Python kernels."""


class ManifoldError(ValueError):
    """Base class for invalid inputs or results of a manifold operation."""


class DimensionMismatch(ManifoldError):
    pass


class NonFiniteError(ManifoldError):
    pass


class EigenvalueFloorViolation(ManifoldError):
    """Raised when a matrix that must be positive definite has an eigenvalue
    at or below the relative floor ``floor * lambda_max``."""


class ConvergenceError(RuntimeError):
    pass


class RankDeficientError(ManifoldError):
    pass
