"""Kernel backend selection.

The compiled kernels are used when importable; set ``SEQDFO_BACKEND=python``
to force the pure-Python fallback (both give identical results).
"""

import os

_requested = os.environ.get("SEQDFO_BACKEND", "auto").lower()

if _requested == "python":
    from . import _pykernels as kernels
else:
    try:
        from . import _ckernels as kernels
    except ImportError:
        if _requested == "cython":
            raise
        from . import _pykernels as kernels

BACKEND = kernels.BACKEND

__all__ = ["kernels", "BACKEND"]
