"""Backend selection for the hot loops.

The compiled extension is used when it imports; set ``LANGSPACE_PURE_PYTHON=1``
to force the pure-Python implementation.
"""
import os

from . import _kernels_py

if os.environ.get("LANGSPACE_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _kernels_py

BACKEND = "python" if _impl is _kernels_py else "cython"

vincenty_inverse = _impl.vincenty_inverse
great_circle = _impl.great_circle
geodesic_pairs = _impl.geodesic_pairs
prefix_pairs = _impl.prefix_pairs

WGS84_A = _kernels_py.WGS84_A
WGS84_F = _kernels_py.WGS84_F
