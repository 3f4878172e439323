"""Backend selection for the hot quadrature kernels.

NAMBUFLOW_NUMBA=0 forces the pure-numpy path; unset or 1 tries numba first
and silently falls back to numpy if numba is unavailable.
"""

import os
import warnings

_flag = os.environ.get("NAMBUFLOW_NUMBA", "").strip().lower()

if _flag in ("0", "false", "no", "off"):
    from . import _kernels_numpy as _impl
    BACKEND = "numpy"
else:
    try:
        from . import _kernels_numba as _impl
        BACKEND = "numba"
    except ImportError as exc:  # pragma: no cover - depends on environment
        if _flag in ("1", "true", "yes", "on"):
            warnings.warn(f"numba backend requested but unavailable ({exc}); "
                          "falling back to numpy")
        from . import _kernels_numpy as _impl
        BACKEND = "numpy"

s_finite_batch = _impl.s_finite_batch
