"""Numba switch.

Kernels are written once in a numpy subset that numba can compile. Setting
``NETRECON_DISABLE_NUMBA=1`` (or running without numba installed) leaves
them as plain Python/numpy functions.
"""

import os

_FLAG = "NETRECON_DISABLE_NUMBA"


def _numba_requested():
    return os.environ.get(_FLAG, "").strip().lower() not in ("1", "true", "yes", "on")


try:
    if not _numba_requested():
        raise ImportError
    import numba as _numba
except ImportError:
    _numba = None

NUMBA_ENABLED = _numba is not None


def njit(fn):
    """Compile ``fn`` with numba when enabled, otherwise return it unchanged."""
    if _numba is None:
        return fn
    return _numba.njit(cache=True)(fn)

