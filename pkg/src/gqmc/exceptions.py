"""Exception types raised across the library."""


class GqmcError(Exception):
    """Base class for all library errors."""


class NotSymmetric(GqmcError):
    def __init__(self, residual: float):
        self.residual = residual
        super().__init__(f"matrix is not symmetric: max|M - M^T| = {residual:.3e}")


class NotIdempotent(GqmcError):
    def __init__(self, residual: float):
        self.residual = residual
        super().__init__(f"matrix is not idempotent: max|M^2 - M| = {residual:.3e}")


class WrongRank(GqmcError):
    def __init__(self, trace: float, k: int):
        self.residual = abs(trace - k)
        super().__init__(f"trace {trace:.6g} does not match rank {k}: |tr - k| = {self.residual:.3e}")


class DegenerateDraw(GqmcError):
    """Gaussian draw was numerically rank-deficient three times in a row."""


class EigengapCollapse(GqmcError):
    """Retraction is ambiguous: k-th and (k+1)-th eigenvalues coincide."""


class UnsupportedSpace(GqmcError):
    """Closed-form constants exist only on G(2,4); use a Monte Carlo oracle."""


class KernelSpaceMismatch(GqmcError):
    """Kernel and point configuration live on different Grassmannians."""


class KernelNotPositiveDefinite(GqmcError):
    """wce² came out more negative than roundoff can explain."""


class NoConvergence(GqmcError):
    """Optimizer missed its energy tolerance; carries the best result seen."""

    def __init__(self, result, message: str = ""):
        self.result = result
        super().__init__(message or f"no convergence: best energy {result.energy:.3e}")


class DomainError(GqmcError):
    """Argument outside the domain of a special function."""


class NonPositiveValue(GqmcError):
    """Log-log regression needs strictly positive values."""


class InsufficientData(GqmcError):
    """A slope fit needs at least three points."""


class MissingDesignFile(GqmcError):
    """An experiment command needs design files that were never generated."""
