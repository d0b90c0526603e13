"""Kernel backend selection.

The compiled extension is used when importable; set ``ILT_LAB_PURE=1``
to force the numpy fallback.
"""

import os

from . import _pykernels

BACKEND = "python"
if os.environ.get("ILT_LAB_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
else:
    _impl = _pykernels

euler_chunk = _impl.euler_chunk
downcross_chunk = _impl.downcross_chunk
bessel_exact_chunk = _impl.bessel_exact_chunk


def get_backend(name=None):
    """Return the kernel module for ``name`` ("cython", "python") or the active one."""
    if name is None:
        return _impl
    if name == "python":
        return _pykernels
    if name == "cython":
        from . import _ckernels
        return _ckernels
    raise ValueError(f"unknown backend {name!r}")
