"""Pick the compiled integrator when available, the pure-Python one otherwise."""

import os

from . import _pykernels

_FORCE_PY = os.environ.get("ARCHSWITCH_PURE_PYTHON", "").strip().lower() in ("1", "true", "yes")

if _FORCE_PY:
    kernels = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _kernels as kernels  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        kernels = _pykernels
        BACKEND = "python"

__all__ = ["kernels", "BACKEND"]
