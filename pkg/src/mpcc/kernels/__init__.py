"""Kernel backend selection.

The compiled extension (`mpcc.kernels._native`, Cython) is preferred
when it imported cleanly; the numpy reference in `pyref` is the
fallback. Set MPCC_PURE_PYTHON=1 to force the fallback (used by the
backend-equivalence tests and the kernel benchmark).
"""

import os

from . import pyref

nn_brute = pyref.nn_brute

if os.environ.get("MPCC_PURE_PYTHON", "") == "1":
    _impl = pyref
else:
    try:
        from . import _native as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = pyref

BACKEND = _impl.BACKEND_NAME
scan_forward = _impl.scan_forward
scan_backward = _impl.scan_backward
nn_grid = _impl.nn_grid
