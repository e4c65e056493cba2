"""Exception types shared across the package."""


class VpfpError(Exception):
    """Base class for all package errors."""


class ConfigurationError(VpfpError):
    """Inconsistent grids, unknown keys, or invalid argument combinations."""


class CapabilityError(VpfpError):
    """Request exceeds what the configured discretization can resolve."""


class MultiplierOverflowError(VpfpError):
    """Gevrey multiplier overflows; carries the offending (k, eta)."""

    def __init__(self, k, eta, exponent):
        self.k, self.eta, self.exponent = k, eta, exponent
        super().__init__(
            f"multiplier exponent {exponent:.3g} overflows at (k={k}, eta={eta:.6g})"
        )


class StabilityViolationError(VpfpError):
    """Penrose margin is not positive; resolvent inversion is ill-posed."""


class RefinementError(VpfpError):
    """Scan or cap too coarse: result moved beyond tolerance under refinement."""


class QuadratureError(VpfpError):
    """Laplace/contour quadrature cannot reach the requested accuracy."""


class PositivityError(VpfpError):
    """F = mu + h is not positive on the physical grid."""


class BlowUpError(VpfpError):
    """NaN/Inf appeared during time stepping; carries the partial history."""

    def __init__(self, time, trace=None):
        self.time = time
        self.trace = trace
        super().__init__(f"state blew up at t = {time:.6g}")


class FitError(VpfpError):
    """Empty/invalid fit window or degenerate normal equations."""


class TruncationWarning(UserWarning):
    """Non-negligible mass at a grid boundary; results may be clipped."""
