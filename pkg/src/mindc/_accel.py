"""Optional numba acceleration.

Set ``MINDC_NUMBA=0`` in the environment to force the pure-numpy kernels.
The flag is read once at import time.
"""

import os
import warnings

_flag = os.environ.get("MINDC_NUMBA", "1").strip().lower()
_requested = _flag not in ("0", "false", "no", "off")

try:
    import numba as _numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    _numba = None
    if _requested:
        warnings.warn("numba not importable; using numpy kernels", RuntimeWarning)

USE_NUMBA = _requested and _numba is not None


def njit(*args, **kwargs):
    """``numba.njit`` when acceleration is on, identity otherwise."""
    if USE_NUMBA:
        return _numba.njit(*args, **kwargs)
    if args and callable(args[0]):
        return args[0]

    def identity(fn):
        return fn

    return identity

