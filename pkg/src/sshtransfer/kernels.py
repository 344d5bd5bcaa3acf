"""Kernel backend selection.

The compiled extension is used when importable.  Setting the environment
variable ``SSHTRANSFER_PURE_PYTHON=1`` forces the NumPy fallback.
"""
import os

from . import _kernels_py

if os.environ.get("SSHTRANSFER_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

rk4_advance = _impl.rk4_advance
tridiag_eigh = _impl.tridiag_eigh

__all__ = ["BACKEND", "rk4_advance", "tridiag_eigh"]
