"""Exception types shared across the package."""


class CurveflowError(Exception):
    """Base class for all package-specific errors."""


class DimensionMismatchError(CurveflowError):
    """Curvature tuple dimension does not match the cone or speed."""


class ZeroTupleError(CurveflowError):
    """Operation undefined for the zero curvature tuple."""


class ConeViolationError(CurveflowError):
    """Curvature tuple left the admissible cone (a type-0 hazard)."""


class DegenerateEigenvaluesError(CurveflowError):
    """Coincident eigenvalues with no limit rule for the difference quotient."""


class CylinderConstantError(CurveflowError):
    """Speed vanishes (or is undefined) on the requested cylinder tuple."""


class UnboundedRatioError(CurveflowError):
    """Normalized ratio is unbounded on the cone slice (speed degenerates)."""


class PinchingConfigError(CurveflowError):
    """Inconsistent pinching context (bad sigma, Theta too small, ...)."""


class SupportMarginError(CurveflowError):
    """Scalar field support violates the declared cylindrical margin."""


class SurfaceError(CurveflowError):
    """Invalid or degenerate discrete surface."""


class ConfigError(CurveflowError):
    """Run configuration failed validation.

    Carries the dotted path of the offending field when known.
    """

    def __init__(self, message, field=None):
        self.field = field
        if field is not None:
            message = f"{field}: {message}"
        super().__init__(message)
