"""Backend selection for the hot kernels.

Set ``IGS_DISABLE_NUMBA=1`` in the environment (before import) to force the
pure-numpy path even when numba is installed.
"""
from __future__ import annotations

import os

_FLAG = os.environ.get("IGS_DISABLE_NUMBA", "").strip().lower()
DISABLED_BY_ENV = _FLAG not in ("", "0", "false", "no")

try:
    if DISABLED_BY_ENV:
        raise ImportError("numba disabled by IGS_DISABLE_NUMBA")
    import numba as _numba

    njit = _numba.njit
    NUMBA_AVAILABLE = True
except ImportError:
    _numba = None
    NUMBA_AVAILABLE = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda f: f


def backend() -> str:
    return "numba" if NUMBA_AVAILABLE else "numpy"
