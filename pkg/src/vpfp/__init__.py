"""Spectral laboratory for the Vlasov-Poisson-Fokker-Planck system near
Maxwellian on a torus: linear Landau damping via the Volterra density
equation, enhanced dissipation at the nu^{1/3} rate, and plasma-echo
analysis, all on a truncated double-Fourier grid."""

from ._core import BACKEND as KERNEL_BACKEND
from .spectral import (
    GevreyWeight,
    Grid,
    SpectralState,
    StabilityConstants,
    apply_multiplier,
    forward_transform,
    gevrey_radius,
    inverse_transform,
    weighted_norm,
)

__version__ = "0.1.0"

__all__ = [
    "KERNEL_BACKEND",
    "Grid",
    "SpectralState",
    "GevreyWeight",
    "StabilityConstants",
    "forward_transform",
    "inverse_transform",
    "gevrey_radius",
    "apply_multiplier",
    "weighted_norm",
    "__version__",
]
