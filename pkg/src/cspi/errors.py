"""Exception hierarchy shared by all cspi modules."""


class CspiError(Exception):
    """Base class for all errors raised by this package."""


class PoleError(CspiError):
    """A sphere point at (or numerically indistinguishable from) the south pole."""


class ShapeError(CspiError):
    """Sequence lengths inconsistent with the time grid."""


class BranchError(CspiError):
    """Per-step phase jump of a complex logarithm exceeded the guard threshold."""


class DegenerateError(CspiError):
    """1 + R is (numerically) zero: the stationary contribution vanishes."""


class ConvergenceError(CspiError):
    """An iterative solver failed to reach its residual target."""

    def __init__(self, message, best_residual=None):
        super().__init__(message)
        self.best_residual = best_residual


class SingularMatrixError(CspiError):
    """Determinant vanished (|det| below threshold); Gaussian integral undefined."""


class TruncationError(CspiError):
    """Fock-space truncation bound exceeds the requested tolerance."""


class DimensionError(CspiError):
    """Requested Hilbert-space dimension is out of the supported dense range."""


class QuadratureError(CspiError):
    """Quadrature rule cannot represent the integrand (degree or sampling)."""


class IllConditionedError(CspiError):
    """Regulator so small that the characteristic-root spread overflows."""


class MeshError(CspiError):
    """Layer-refined mesh failed to meet the boundary-value residual target."""


class SingularBVPError(CspiError):
    """Boundary-value problem is at a conjugate-point degeneracy."""


class ValidationError(CspiError):
    """Run configuration is inconsistent or incomplete."""
