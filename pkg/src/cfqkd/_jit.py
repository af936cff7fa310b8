"""Backend selection for the hot kernels.

Set ``CFQKD_DISABLE_NUMBA=1`` to run the pure-numpy implementations. When numba
is not importable the numpy path is used automatically.
"""
from __future__ import annotations

import os

_DISABLED = os.environ.get("CFQKD_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not _DISABLED


def njit(*args, **kwargs):
    """``numba.njit`` when numba is installed, identity decorator otherwise.

    The decorated function is compiled even when the env flag disables numba,
    so tests and benchmarks can still compare both backends.
    """
    if HAVE_NUMBA:
        return numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda fn: fn


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"
