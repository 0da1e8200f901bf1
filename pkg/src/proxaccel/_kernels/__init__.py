"""Elementwise kernels with a compiled fast path and a NumPy fallback.

The compiled extension is preferred when importable; setting the environment
variable ``PROXACCEL_PURE_PYTHON`` to a nonempty value forces the fallback.
``BACKEND`` reports which implementation is active.
"""

import os
import warnings

from . import _reference

if os.environ.get("PROXACCEL_PURE_PYTHON"):
    _impl = _reference
else:
    try:
        from . import _fastpath as _impl
    except ImportError:  # pragma: no cover - depends on build environment
        warnings.warn(
            "compiled kernels unavailable, using the NumPy fallback",
            RuntimeWarning,
            stacklevel=2,
        )
        _impl = _reference

BACKEND = _impl.BACKEND
soft_threshold = _impl.soft_threshold
clip_box = _impl.clip_box
sigmoid = _impl.sigmoid
log1p_exp = _impl.log1p_exp

__all__ = ["BACKEND", "soft_threshold", "clip_box", "sigmoid", "log1p_exp"]
