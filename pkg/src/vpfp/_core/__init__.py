"""Hot-kernel backend selection.

The compiled Cython extension is preferred; the NumPy implementation is the
fallback.  Set VPFP_PURE_PYTHON=1 to force the fallback (used by the
benchmark and by tests that compare the two).
"""

import os

from . import kernels_np

if os.environ.get("VPFP_PURE_PYTHON"):
    _backend = kernels_np
else:
    try:
        from . import _kernels as _backend
    except ImportError:
        _backend = kernels_np

BACKEND = _backend.NAME
affine_gather = _backend.affine_gather
gather_points = _backend.gather_points
mode_convolve = _backend.mode_convolve

__all__ = ["BACKEND", "affine_gather", "gather_points", "mode_convolve", "kernels_np"]
