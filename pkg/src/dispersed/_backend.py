"""Select the kernel implementation at import time.

The compiled ``_kernels`` extension is used when it was built; setting
``DISPERSED_PURE_PYTHON=1`` forces the pure-Python twins.
"""
import os

from . import _kernels_py

kernels = _kernels_py
BACKEND = "python"

if not os.environ.get("DISPERSED_PURE_PYTHON"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        pass
    else:
        kernels = _compiled
        BACKEND = "cython"

__all__ = ["kernels", "BACKEND"]
